#pragma once

#include "retain/model.hpp"
#include "retain/session.hpp"

#include <vector>

namespace retain {

// One menu line as the trainee sees it: no correctness information.
struct MenuChoice {
  ActionKind kind;
  std::vector<std::string> params;  // parameter submenu; empty when unparameterized

  friend bool operator==(const MenuChoice&, const MenuChoice&) = default;
};

// Validates the scenario (Error InvalidScenario on failure) and returns a
// fresh state at the initial stage with a full health bar.
SessionState start_session(const Scenario& scenario, const SessionConfig& config = {});

// Current stage menu in authored order. Throws SessionEnded once over.
std::vector<MenuChoice> legal_actions(const Scenario& scenario, const SessionState& state);

// Applies one trainee decision and appends exactly one log record.
// Throws SessionEnded, UnknownAction (kind not on the menu or parameter not
// offered); neither changes the state.
FeedbackEvent apply_action(const Scenario& scenario, SessionState& state,
                           const ActionInstance& action);

// Ends an ongoing session as Abandoned (EOF, idle timeout) with a log record.
void abandon_session(SessionState& state);

InfantVitals current_vitals(const Scenario& scenario, const SessionState& state);

// Re-applies every logged record against the scenario. The header (and so
// the wall clock) is carried over from the input log.
SessionState replay(const Scenario& scenario, const SessionLog& log);

namespace detail {
// start_session without validation, for callers that validated already.
SessionState fresh_state(const Scenario& scenario, const SessionConfig& config);
}  // namespace detail

}  // namespace retain
