#include "retain/guidance.hpp"

#include "retain/error.hpp"

namespace retain {

std::optional<GuidanceCue> next_cue(const Scenario& scenario, const SessionState& state) {
  if (state.ended()) return std::nullopt;
  const Stage& stage = scenario.stage(state.stage);
  if (scenario.guidance == GuidanceMode::Partial) return stage.cue;
  if (stage.cue && stage.cue->names_correct_action) return stage.cue;

  for (const auto& entry : stage.menu) {
    if (!entry.correct) continue;
    GuidanceCue cue;
    cue.text = "Next, " + std::string(action_kind_label(entry.kind));
    if (entry.param) cue.text += " at " + *entry.param;
    cue.text += ".";
    cue.names_correct_action = true;
    return cue;
  }
  return stage.cue;
}

std::string default_mistake_utterance(ActionKind kind, const std::optional<std::string>& param) {
  std::string what(action_kind_label(kind));
  if (param) what += " at " + *param;
  return "Not " + what + ". Check the algorithm.";
}

std::string mistake_utterance(const Scenario& scenario, const SessionState& state,
                              const ActionInstance& chosen) {
  const Stage& stage = scenario.stage(state.stage);
  const MenuEntry* entry = stage.find_entry(chosen.kind);
  if (entry == nullptr) {
    throw Error(ErrorKind::Contract, "'" + std::string(action_kind_id(chosen.kind)) +
                                         "' is not on the menu at stage '" + stage.id + "'");
  }
  if (entry->correct && (!entry->param || entry->param == chosen.param)) {
    throw Error(ErrorKind::Contract, "'" + describe_action(chosen) + "' is correct at stage '" +
                                         stage.id + "'; no mistake to explain");
  }
  if (entry->mistake_utterance) return *entry->mistake_utterance;
  return default_mistake_utterance(chosen.kind, chosen.param);
}

const DialogueNode& traverse_dialogue(const DialogueTree& tree,
                                      std::span<const std::size_t> path) {
  const DialogueNode* node = tree.find(tree.root);
  if (node == nullptr) throw InvalidChoice(0, "dialogue root '" + tree.root + "' is missing");
  for (std::size_t depth = 0; depth < path.size(); ++depth) {
    const std::size_t index = path[depth];
    if (index >= node->children.size()) {
      throw InvalidChoice(depth, "choice " + std::to_string(index) + " at depth " +
                                     std::to_string(depth) + " is out of range (node '" +
                                     node->id + "' has " +
                                     std::to_string(node->children.size()) + " options)");
    }
    const DialogueNode* next = tree.find(node->children[index].target);
    if (next == nullptr) {
      throw InvalidChoice(depth, "choice leads to missing node '" +
                                     node->children[index].target + "'");
    }
    node = next;
  }
  return *node;
}

}  // namespace retain
