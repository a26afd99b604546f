#include "retain/engine.hpp"

#include "retain/error.hpp"
#include "retain/guidance.hpp"

#include <chrono>

namespace retain {

std::string_view outcome_id(Outcome o) noexcept {
  switch (o) {
    case Outcome::Ongoing: return "ongoing";
    case Outcome::Saved: return "saved";
    case Outcome::Died: return "died";
    case Outcome::Abandoned: return "abandoned";
  }
  return "ongoing";
}

std::optional<Outcome> parse_outcome(std::string_view id) noexcept {
  for (auto o : {Outcome::Ongoing, Outcome::Saved, Outcome::Died, Outcome::Abandoned}) {
    if (outcome_id(o) == id) return o;
  }
  return std::nullopt;
}

std::string_view feedback_kind_id(FeedbackKind k) noexcept {
  switch (k) {
    case FeedbackKind::Correct: return "correct";
    case FeedbackKind::MistakeWrongAction: return "mistake_wrong_action";
    case FeedbackKind::MistakeWrongParam: return "mistake_wrong_param";
    case FeedbackKind::Death: return "death";
    case FeedbackKind::Save: return "save";
  }
  return "correct";
}

std::optional<FeedbackKind> parse_feedback_kind(std::string_view id) noexcept {
  for (auto k : {FeedbackKind::Correct, FeedbackKind::MistakeWrongAction,
                 FeedbackKind::MistakeWrongParam, FeedbackKind::Death, FeedbackKind::Save}) {
    if (feedback_kind_id(k) == id) return k;
  }
  return std::nullopt;
}

std::string SessionState::position() const {
  return outcome == Outcome::Saved ? std::string(kSaveTarget) : stage;
}

namespace {

bool same_header(const LogHeader& a, const LogHeader& b, bool ignore_session_id) {
  return a.format == b.format && a.scenario_id == b.scenario_id && a.config == b.config &&
         a.rng == b.rng && (ignore_session_id || a.session_id == b.session_id);
}

}  // namespace

bool equivalent(const SessionState& a, const SessionState& b) {
  return a.scenario_id == b.scenario_id && a.stage == b.stage && a.mistakes == b.mistakes &&
         a.health == b.health && a.step_index == b.step_index &&
         a.logical_time == b.logical_time && a.stage_attempts == b.stage_attempts &&
         a.outcome == b.outcome && a.config == b.config &&
         same_header(a.log.header, b.log.header, false) && a.log.records == b.log.records;
}

bool equivalent_logs(const SessionLog& a, const SessionLog& b) {
  return same_header(a.header, b.header, true) && a.records == b.records;
}

int health_level(int mistakes, int max_mistakes) noexcept {
  if (max_mistakes < 1 || mistakes >= max_mistakes) return 0;
  const int remaining = max_mistakes - (mistakes < 0 ? 0 : mistakes);
  // Ceiling keeps the bar above zero until the final mistake.
  return (kFullHealth * remaining + max_mistakes - 1) / max_mistakes;
}

namespace detail {

SessionState fresh_state(const Scenario& scenario, const SessionConfig& config) {
  if (config.max_mistakes < 1) {
    throw Error(ErrorKind::InvalidArgument, "max_mistakes must be at least 1");
  }
  SessionState state;
  state.scenario_id = scenario.id;
  state.stage = scenario.initial_stage;
  state.config = config;
  state.log.header.scenario_id = scenario.id;
  state.log.header.config = config;
  state.log.header.started_at_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                       std::chrono::system_clock::now().time_since_epoch())
                                       .count();
  return state;
}

}  // namespace detail

SessionState start_session(const Scenario& scenario, const SessionConfig& config) {
  ValidationReport report = validate_scenario(scenario);
  if (!report.ok()) {
    throw Error(ErrorKind::InvalidScenario,
                "scenario '" + scenario.id + "' is invalid:\n" + report.summary());
  }
  return detail::fresh_state(scenario, config);
}

namespace {

void require_ongoing(const SessionState& state) {
  if (state.ended()) {
    throw Error(ErrorKind::SessionEnded,
                "session for '" + state.scenario_id + "' has ended (" +
                    std::string(outcome_id(state.outcome)) + ")");
  }
}

const Stage& current_stage(const Scenario& scenario, const SessionState& state) {
  if (scenario.id != state.scenario_id) {
    throw Error(ErrorKind::InvalidArgument, "session belongs to scenario '" + state.scenario_id +
                                                "', not '" + scenario.id + "'");
  }
  return scenario.stage(state.stage);
}

}  // namespace

std::vector<MenuChoice> legal_actions(const Scenario& scenario, const SessionState& state) {
  require_ongoing(state);
  const Stage& stage = current_stage(scenario, state);
  std::vector<MenuChoice> menu;
  menu.reserve(stage.menu.size());
  for (const auto& entry : stage.menu) {
    MenuChoice choice{entry.kind, {}};
    if (const ParamSpec* spec = param_spec(entry.kind)) {
      for (const auto& v : spec->allowed_values) choice.params.push_back(v.label);
    }
    menu.push_back(std::move(choice));
  }
  return menu;
}

FeedbackEvent apply_action(const Scenario& scenario, SessionState& state,
                           const ActionInstance& action) {
  require_ongoing(state);
  const Stage& stage = current_stage(scenario, state);
  const MenuEntry* entry = stage.find_entry(action.kind);
  if (entry == nullptr) {
    throw Error(ErrorKind::UnknownAction, "'" + std::string(action_kind_id(action.kind)) +
                                              "' is not on the menu at stage '" + stage.id + "'");
  }
  try {
    check_action(action);
  } catch (const Error& e) {
    throw Error(ErrorKind::UnknownAction, e.what());
  }

  const bool late = state.config.timing_enforced && stage.time_budget &&
                    state.stage_attempts >= *stage.time_budget;

  FeedbackEvent event;
  LogRecord record;
  record.step = state.step_index;
  record.stage = stage.id;
  record.action = action;

  if (!late && entry->correct && (!entry->param || entry->param == action.param)) {
    InfantVitals vitals = stage.vitals;
    vitals.health = state.health;
    const Transition* t = stage.select_transition(vitals);
    if (t == nullptr) {
      throw Error(ErrorKind::InvalidScenario,
                  "no transition applies at stage '" + stage.id + "'");
    }
    if (t->to_save()) {
      state.outcome = Outcome::Saved;
      event.kind = FeedbackKind::Save;
    } else {
      state.stage = t->target;
      state.stage_attempts = 0;
      event.kind = FeedbackKind::Correct;
    }
  } else {
    const bool wrong_param = !late && entry->correct;
    event.utterance = late ? "Too slow: the window for this step has passed."
                           : mistake_utterance(scenario, state, action);
    event.audio_cue = true;
    ++state.mistakes;
    state.health = health_level(state.mistakes, state.config.max_mistakes);
    if (state.mistakes >= state.config.max_mistakes) {
      state.outcome = Outcome::Died;
      event.kind = FeedbackKind::Death;
    } else {
      event.kind = wrong_param ? FeedbackKind::MistakeWrongParam : FeedbackKind::MistakeWrongAction;
    }
    // A late action opens a fresh time window at the same stage.
    state.stage_attempts = late ? 0 : state.stage_attempts + 1;
  }

  ++state.step_index;
  ++state.logical_time;
  record.time = state.logical_time;
  record.feedback = event.kind;
  record.mistakes = state.mistakes;
  record.health = state.health;
  record.next = state.position();
  state.log.records.push_back(std::move(record));
  return event;
}

void abandon_session(SessionState& state) {
  require_ongoing(state);
  LogRecord record;
  record.step = state.step_index;
  record.time = state.logical_time;
  record.event = RecordEvent::Abandoned;
  record.stage = state.stage;
  record.mistakes = state.mistakes;
  record.health = state.health;
  record.next = state.stage;
  state.outcome = Outcome::Abandoned;
  ++state.step_index;
  state.log.records.push_back(std::move(record));
}

InfantVitals current_vitals(const Scenario& scenario, const SessionState& state) {
  InfantVitals v = current_stage(scenario, state).vitals;
  v.health = state.health;
  return v;
}

SessionState replay(const Scenario& scenario, const SessionLog& log) {
  if (log.header.scenario_id != scenario.id) {
    throw ReplayDivergence(0, "log is for scenario '" + log.header.scenario_id + "', not '" +
                                  scenario.id + "'");
  }
  SessionState state = detail::fresh_state(scenario, log.header.config);
  state.log.header = log.header;

  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const LogRecord& rec = log.records[i];
    if (rec.step != static_cast<int>(i)) {
      throw ReplayDivergence(i, "record has step index " + std::to_string(rec.step));
    }
    if (rec.stage != state.stage || scenario.find_stage(rec.stage) == nullptr) {
      throw ReplayDivergence(i, "record is at stage '" + rec.stage + "' but replay is at '" +
                                    state.stage + "'");
    }
    try {
      if (rec.event == RecordEvent::Abandoned) {
        abandon_session(state);
      } else {
        if (!rec.action) throw ReplayDivergence(i, "action record without an action");
        apply_action(scenario, state, *rec.action);
      }
    } catch (const ReplayDivergence&) {
      throw;
    } catch (const Error& e) {
      throw ReplayDivergence(i, e.what());
    }
    if (!(state.log.records.back() == rec)) {
      throw ReplayDivergence(i, "replayed record differs from the logged one");
    }
  }
  return state;
}

}  // namespace retain
