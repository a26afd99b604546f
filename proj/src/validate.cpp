#include "retain/error.hpp"
#include "retain/model.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace retain {

std::string_view violation_code_id(ViolationCode code) noexcept {
  switch (code) {
    case ViolationCode::InvalidHeader: return "invalid header";
    case ViolationCode::DuplicateStage: return "duplicate stage";
    case ViolationCode::UnknownInitialStage: return "unknown initial stage";
    case ViolationCode::EmptyMenu: return "empty menu";
    case ViolationCode::DuplicateMenuKind: return "duplicate menu kind";
    case ViolationCode::MissingCorrectEntry: return "missing correct entry";
    case ViolationCode::CorrectParamMissing: return "correct param missing";
    case ViolationCode::InvalidParam: return "invalid param";
    case ViolationCode::InvalidVitals: return "invalid vitals";
    case ViolationCode::EmptyCue: return "empty cue";
    case ViolationCode::InvalidTimeBudget: return "invalid time budget";
    case ViolationCode::NoTransitions: return "no transitions";
    case ViolationCode::MissingFallback: return "missing fallback transition";
    case ViolationCode::DanglingTransition: return "dangling transition";
    case ViolationCode::UnreachableStage: return "unreachable stage";
    case ViolationCode::Cycle: return "cycle";
    case ViolationCode::NoSavePath: return "no save path";
    case ViolationCode::TutorialNotComplete: return "tutorial guidance mode";
    case ViolationCode::TutorialGuidanceIncomplete: return "tutorial guidance incomplete";
    case ViolationCode::PartialGuidanceFullyCued: return "partial guidance fully cued";
    case ViolationCode::MetricsMismatch: return "metrics mismatch";
    case ViolationCode::InvalidDialogue: return "invalid dialogue";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationCode code) const noexcept {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    if (v.line > 0) out << "line " << v.line << ": ";
    out << violation_code_id(v.code) << ": " << v.message << "\n";
  }
  return out.str();
}

namespace {

class Validator {
public:
  explicit Validator(const Scenario& s) : scenario_(s) {}

  ValidationReport run() {
    check_header();
    check_stages();
    bool graph_ok = report_.ok();
    if (graph_ok) graph_ok = check_graph();
    if (graph_ok) check_metrics();
    check_guidance();
    if (scenario_.briefing) check_dialogue(*scenario_.briefing);
    return std::move(report_);
  }

private:
  void add(ViolationCode code, std::string message, const Stage* stage = nullptr, int line = 0) {
    Violation v{code, std::move(message), {}, line};
    if (stage != nullptr) {
      v.stage = stage->id;
      if (v.line == 0) v.line = stage->line.value;
    }
    report_.violations.push_back(std::move(v));
  }

  void check_header() {
    if (scenario_.id.empty()) add(ViolationCode::InvalidHeader, "scenario id is empty");
    if (scenario_.difficulty_tier < 0 || scenario_.difficulty_tier > 3) {
      add(ViolationCode::InvalidHeader,
          "tier " + std::to_string(scenario_.difficulty_tier) + " outside 0..3");
    }
    if (scenario_.stages.empty()) add(ViolationCode::InvalidHeader, "scenario has no stages");
    if (scenario_.find_stage(scenario_.initial_stage) == nullptr) {
      add(ViolationCode::UnknownInitialStage,
          "initial stage '" + scenario_.initial_stage + "' is not defined");
    }
  }

  void check_stages() {
    std::unordered_set<std::string> seen;
    for (const auto& stage : scenario_.stages) {
      if (stage.id == kSaveTarget || stage.id.empty()) {
        add(ViolationCode::DuplicateStage, "stage id '" + stage.id + "' is reserved", &stage);
      } else if (!seen.insert(stage.id).second) {
        add(ViolationCode::DuplicateStage, "stage '" + stage.id + "' defined twice", &stage);
      }
      check_menu(stage);
      if (stage.vitals.heart_rate < 0 || stage.vitals.health < 0 ||
          stage.vitals.health > kFullHealth) {
        add(ViolationCode::InvalidVitals, "stage '" + stage.id + "' has out-of-range vitals",
            &stage);
      }
      if (stage.cue && stage.cue->text.empty()) {
        add(ViolationCode::EmptyCue, "stage '" + stage.id + "' has an empty cue", &stage);
      }
      if (stage.time_budget && *stage.time_budget < 1) {
        add(ViolationCode::InvalidTimeBudget, "stage '" + stage.id + "' time budget must be >= 1",
            &stage);
      }
      check_transitions(stage);
    }
  }

  void check_menu(const Stage& stage) {
    if (stage.menu.empty()) {
      add(ViolationCode::EmptyMenu, "stage '" + stage.id + "' has no menu entries", &stage);
      return;
    }
    std::unordered_set<int> kinds;
    bool any_correct = false;
    for (const auto& entry : stage.menu) {
      const std::string kind(action_kind_id(entry.kind));
      if (!kinds.insert(static_cast<int>(entry.kind)).second) {
        add(ViolationCode::DuplicateMenuKind,
            "stage '" + stage.id + "' lists '" + kind + "' more than once", &stage,
            entry.line.value);
      }
      any_correct = any_correct || entry.correct;
      const ParamSpec* spec = param_spec(entry.kind);
      if (entry.param) {
        if (spec == nullptr) {
          add(ViolationCode::InvalidParam, "'" + kind + "' takes no parameter", &stage,
              entry.line.value);
        } else if (!entry.correct) {
          add(ViolationCode::InvalidParam,
              "wrong entry '" + kind + "' must not fix a parameter value", &stage,
              entry.line.value);
        } else if (!spec->allows(*entry.param)) {
          add(ViolationCode::InvalidParam,
              "'" + *entry.param + "' is not a valid " + spec->name + " for '" + kind + "'",
              &stage, entry.line.value);
        }
      } else if (spec != nullptr && entry.correct) {
        add(ViolationCode::CorrectParamMissing,
            "correct entry '" + kind + "' in stage '" + stage.id + "' needs a " + spec->name,
            &stage, entry.line.value);
      }
    }
    if (!any_correct) {
      add(ViolationCode::MissingCorrectEntry, "stage '" + stage.id + "' has no correct entry",
          &stage);
    }
  }

  void check_transitions(const Stage& stage) {
    if (stage.transitions.empty()) {
      add(ViolationCode::NoTransitions, "stage '" + stage.id + "' has no transitions", &stage);
      return;
    }
    for (const auto& t : stage.transitions) {
      if (!t.to_save() && scenario_.find_stage(t.target) == nullptr) {
        add(ViolationCode::DanglingTransition,
            "dangling transition from '" + stage.id + "' to unknown stage '" + t.target + "'",
            &stage, t.line.value);
      }
    }
    if (!stage.transitions.back().guard.empty()) {
      add(ViolationCode::MissingFallback,
          "last transition of stage '" + stage.id + "' must be unconditional", &stage,
          stage.transitions.back().line.value);
    }
  }

  // Reachability and acyclicity over every authored edge.
  bool check_graph() {
    enum class Mark { White, Grey, Black };
    std::unordered_map<std::string, Mark> marks;
    for (const auto& s : scenario_.stages) marks[s.id] = Mark::White;

    bool ok = true;
    std::function<void(const Stage&)> visit = [&](const Stage& stage) {
      marks[stage.id] = Mark::Grey;
      for (const auto& t : stage.transitions) {
        if (t.to_save()) continue;
        const Stage& next = scenario_.stage(t.target);
        Mark m = marks[next.id];
        if (m == Mark::Grey) {
          add(ViolationCode::Cycle,
              "cycle through '" + stage.id + "' -> '" + next.id + "'", &stage, t.line.value);
          ok = false;
        } else if (m == Mark::White) {
          visit(next);
        }
      }
      marks[stage.id] = Mark::Black;
    };
    visit(scenario_.stage(scenario_.initial_stage));

    for (const auto& s : scenario_.stages) {
      if (marks[s.id] == Mark::White) {
        add(ViolationCode::UnreachableStage,
            "stage '" + s.id + "' is unreachable from '" + scenario_.initial_stage + "'", &s);
        ok = false;
      }
    }
    return ok;
  }

  void check_metrics() {
    try {
      ScenarioMetrics m = compute_metrics(scenario_);
      if (!(m == scenario_.declared_metrics)) {
        std::ostringstream msg;
        msg << "declared metrics (" << scenario_.declared_metrics.optimal_path_length << ", "
            << scenario_.declared_metrics.distinct_actions << ") but computed ("
            << m.optimal_path_length << ", " << m.distinct_actions << ")";
        add(ViolationCode::MetricsMismatch, msg.str());
      }
    } catch (const Error& e) {
      add(ViolationCode::NoSavePath, e.what());
    }
  }

  void check_guidance() {
    if (scenario_.difficulty_tier == 0) {
      if (scenario_.guidance != GuidanceMode::Complete) {
        add(ViolationCode::TutorialNotComplete, "tier-0 scenario must use complete guidance");
      }
      for (const auto& stage : scenario_.stages) {
        if (!stage.cue || !stage.cue->names_correct_action) {
          add(ViolationCode::TutorialGuidanceIncomplete,
              "tutorial guidance incomplete: stage '" + stage.id +
                  "' lacks a cue naming the correct action",
              &stage);
        }
      }
    }
    if (scenario_.guidance == GuidanceMode::Partial && !scenario_.stages.empty()) {
      bool any_uncued = std::any_of(scenario_.stages.begin(), scenario_.stages.end(),
                                    [](const Stage& s) { return !s.cue.has_value(); });
      if (!any_uncued) {
        add(ViolationCode::PartialGuidanceFullyCued,
            "partial guidance requires at least one uncued stage");
      }
    }
  }

  void check_dialogue(const DialogueTree& tree) {
    std::unordered_map<std::string, int> parents;
    for (const auto& node : tree.nodes) {
      if (!parents.emplace(node.id, 0).second) {
        add(ViolationCode::InvalidDialogue, "dialogue node '" + node.id + "' defined twice");
      }
    }
    for (const auto& node : tree.nodes) {
      for (const auto& child : node.children) {
        auto it = parents.find(child.target);
        if (it == parents.end()) {
          add(ViolationCode::InvalidDialogue,
              "dialogue node '" + node.id + "' points to unknown node '" + child.target + "'");
          continue;
        }
        if (++it->second > 1) {
          add(ViolationCode::InvalidDialogue,
              "dialogue node '" + child.target + "' has more than one parent");
        }
      }
    }
    auto root = parents.find(tree.root);
    if (root == parents.end()) {
      add(ViolationCode::InvalidDialogue, "dialogue root '" + tree.root + "' is not defined");
      return;
    }
    if (root->second != 0) {
      add(ViolationCode::InvalidDialogue, "dialogue root '" + tree.root + "' has a parent");
    }
    for (const auto& [id, count] : parents) {
      if (count == 0 && id != tree.root) {
        add(ViolationCode::InvalidDialogue,
            "dialogue node '" + id + "' is a second root (unreachable from '" + tree.root + "')");
      }
    }
    // With single parents and a parentless root, anything unreachable sits on
    // a cycle.
    std::unordered_set<std::string> seen;
    std::vector<std::string> stack{tree.root};
    while (!stack.empty()) {
      std::string id = std::move(stack.back());
      stack.pop_back();
      if (!seen.insert(id).second) continue;
      if (const DialogueNode* n = tree.find(id)) {
        for (const auto& c : n->children) stack.push_back(c.target);
      }
    }
    if (seen.size() != parents.size()) {
      add(ViolationCode::InvalidDialogue, "dialogue contains a cycle or detached nodes");
    }
  }

  const Scenario& scenario_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_scenario(const Scenario& scenario) {
  return Validator(scenario).run();
}

OptimalPath optimal_path(const Scenario& scenario) {
  const auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorKind::NoSavePath, "scenario '" + scenario.id + "': " + why);
  };

  // With no mistakes the health bar stays full, so the guard outcome at each
  // stage is fixed and the stage route is unique.
  std::vector<const Stage*> route;
  std::unordered_set<std::string> visited;
  const Stage* stage = scenario.find_stage(scenario.initial_stage);
  if (stage == nullptr) throw fail("initial stage is not defined");
  for (;;) {
    if (!visited.insert(stage->id).second) throw fail("route revisits stage '" + stage->id + "'");
    route.push_back(stage);
    InfantVitals v = stage->vitals;
    v.health = kFullHealth;
    const Transition* t = stage->select_transition(v);
    if (t == nullptr) throw fail("no transition applies at stage '" + stage->id + "'");
    if (t->to_save()) break;
    stage = scenario.find_stage(t->target);
    if (stage == nullptr) throw fail("transition to unknown stage '" + t->target + "'");
  }

  std::vector<std::vector<const MenuEntry*>> options;
  for (const Stage* s : route) {
    std::vector<const MenuEntry*> correct;
    for (const auto& e : s->menu) {
      if (e.correct) correct.push_back(&e);
    }
    if (correct.empty()) throw fail("stage '" + s->id + "' has no correct entry");
    options.push_back(std::move(correct));
  }

  // Choose one correct entry per stage to minimise the number of distinct
  // kinds: exhaustive search memoised on (position, kinds used so far).
  const std::size_t n = route.size();
  std::vector<std::unordered_map<unsigned, int>> memo(n);
  std::function<int(std::size_t, unsigned)> best = [&](std::size_t i, unsigned mask) -> int {
    if (i == n) return std::popcount(mask);
    auto it = memo[i].find(mask);
    if (it != memo[i].end()) return it->second;
    int result = static_cast<int>(kActionKindCount) + 1;
    for (const MenuEntry* e : options[i]) {
      unsigned bit = 1u << static_cast<unsigned>(e->kind);
      result = std::min(result, best(i + 1, mask | bit));
    }
    memo[i][mask] = result;
    return result;
  };

  OptimalPath path;
  path.metrics.optimal_path_length = static_cast<int>(n);
  path.metrics.distinct_actions = best(0, 0);
  unsigned mask = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int target = best(i, mask);
    for (const MenuEntry* e : options[i]) {
      unsigned next = mask | (1u << static_cast<unsigned>(e->kind));
      if (best(i + 1, next) == target) {
        path.stages.push_back(route[i]->id);
        path.actions.push_back(ActionInstance{e->kind, e->param});
        mask = next;
        break;
      }
    }
  }
  return path;
}

ScenarioMetrics compute_metrics(const Scenario& scenario) { return optimal_path(scenario).metrics; }

}  // namespace retain
