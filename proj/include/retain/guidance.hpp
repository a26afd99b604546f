#pragma once

#include "retain/model.hpp"
#include "retain/session.hpp"

#include <optional>
#include <span>
#include <string>

namespace retain {

// The doctor's cue for the current stage. Complete guidance always names the
// correct action (the authored cue when it does so, otherwise a generated
// one); partial guidance passes the authored cue through, if any.
std::optional<GuidanceCue> next_cue(const Scenario& scenario, const SessionState& state);

// What the doctor says after `chosen` was judged a mistake at the current
// stage. Throws Error(Contract) if `chosen` is in fact correct.
std::string mistake_utterance(const Scenario& scenario, const SessionState& state,
                              const ActionInstance& chosen);

// "Not <kind>. Check the algorithm." (with the parameter when given)
std::string default_mistake_utterance(ActionKind kind,
                                      const std::optional<std::string>& param = std::nullopt);

// Follows child indices from the root. Throws InvalidChoice with the depth of
// the first bad index.
const DialogueNode& traverse_dialogue(const DialogueTree& tree, std::span<const std::size_t> path);

}  // namespace retain
