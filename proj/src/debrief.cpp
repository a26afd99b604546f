#include "retain/analytics.hpp"
#include "retain/engine.hpp"
#include "retain/error.hpp"
#include "retain/guidance.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>

namespace retain {

std::string_view mistake_cause_id(MistakeCause c) noexcept {
  switch (c) {
    case MistakeCause::WrongAction: return "wrong_action";
    case MistakeCause::WrongParam: return "wrong_param";
    case MistakeCause::Late: return "late";
  }
  return "wrong_action";
}

namespace {

std::string mistake_note(const MistakeDebrief& m) {
  std::ostringstream out;
  if (m.cause == MistakeCause::Late) {
    out << "took too long before choosing " << describe_action(m.chosen);
    return out.str();
  }
  if (m.cause == MistakeCause::WrongParam && !m.correct.empty() && m.chosen.param &&
      m.correct.front().param) {
    out << action_kind_label(m.chosen.kind) << ": chose " << *m.chosen.param << ", correct was "
        << *m.correct.front().param;
    return out.str();
  }
  out << "chose " << describe_action(m.chosen) << ", correct was ";
  for (std::size_t i = 0; i < m.correct.size(); ++i) {
    if (i > 0) out << " or ";
    out << describe_action(m.correct[i]);
  }
  return out.str();
}

}  // namespace

DebriefReport debrief_report(const SessionLog& log, const Scenario& scenario) {
  // Validates the whole log first so a divergent log yields no report.
  replay(scenario, log);

  DebriefReport report;
  report.scenario_id = scenario.id;
  report.scenario_title = scenario.title;
  report.stages_total = static_cast<int>(scenario.stages.size());

  SessionState state = detail::fresh_state(scenario, log.header.config);
  std::string entered;  // stage whose arrival has been counted
  const auto stage_row = [&](const std::string& id) -> StageDebrief& {
    for (auto& row : report.stages) {
      if (row.stage == id) return row;
    }
    report.stages.push_back(StageDebrief{id, 0, 0, 0});
    return report.stages.back();
  };

  for (const LogRecord& rec : log.records) {
    if (entered != state.stage) {
      entered = state.stage;
      StageDebrief& row = stage_row(state.stage);
      if (next_cue(scenario, state)) ++row.cues_shown;
    }
    if (rec.event == RecordEvent::Abandoned) {
      abandon_session(state);
      continue;
    }
    const Stage& stage = scenario.stage(state.stage);
    StageDebrief& row = stage_row(stage.id);
    ++row.attempts;
    ++report.total_actions;

    const bool late = state.config.timing_enforced && stage.time_budget &&
                      state.stage_attempts >= *stage.time_budget;
    const ActionInstance& chosen = *rec.action;
    const int before = state.mistakes;
    apply_action(scenario, state, chosen);
    if (state.mistakes == before) continue;

    ++row.mistakes;
    MistakeDebrief m;
    m.step = rec.step;
    m.stage = stage.id;
    m.chosen = chosen;
    m.fatal = state.outcome == Outcome::Died;
    const MenuEntry* entry = stage.find_entry(chosen.kind);
    m.cause = late                               ? MistakeCause::Late
              : (entry != nullptr && entry->correct) ? MistakeCause::WrongParam
                                                     : MistakeCause::WrongAction;
    for (const auto& e : stage.menu) {
      if (e.correct) m.correct.push_back(ActionInstance{e.kind, e.param});
    }
    m.note = mistake_note(m);
    report.mistakes.push_back(std::move(m));
  }
  if (entered != state.stage && state.outcome == Outcome::Ongoing) {
    StageDebrief& row = stage_row(state.stage);
    if (next_cue(scenario, state)) ++row.cues_shown;
  }

  report.outcome = state.outcome;
  report.total_mistakes = state.mistakes;
  report.stages_visited = static_cast<int>(report.stages.size());
  return report;
}

std::string render_debrief_text(const DebriefReport& r) {
  std::ostringstream out;
  out << "Debrief: " << r.scenario_id;
  if (!r.scenario_title.empty()) out << " (" << r.scenario_title << ")";
  out << "\n";
  std::string outcome(outcome_id(r.outcome));
  for (auto& c : outcome) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  out << "Outcome: " << outcome << "\n";
  out << "Actions: " << r.total_actions << "  Mistakes: " << r.total_mistakes << "\n";
  out << "Coverage: " << r.stages_visited << "/" << r.stages_total << " stages visited\n\n";

  out << std::left << std::setw(24) << "stage" << std::right << std::setw(10) << "attempts"
      << std::setw(10) << "mistakes" << std::setw(8) << "cues" << "\n";
  for (const auto& s : r.stages) {
    out << std::left << std::setw(24) << s.stage << std::right << std::setw(10) << s.attempts
        << std::setw(10) << s.mistakes << std::setw(8) << s.cues_shown << "\n";
  }
  out << "\n";
  if (r.mistakes.empty()) {
    out << "No mistakes.\n";
  } else {
    out << "Mistakes:\n";
    for (const auto& m : r.mistakes) {
      out << "  step " << m.step << " at " << m.stage << ": " << m.note;
      if (m.fatal) out << " (fatal)";
      out << "\n";
    }
  }
  return out.str();
}

std::string render_debrief_json(const DebriefReport& r) {
  using ojson = nlohmann::ordered_json;
  ojson j;
  j["scenario"] = r.scenario_id;
  j["title"] = r.scenario_title;
  j["outcome"] = outcome_id(r.outcome);
  j["total_actions"] = r.total_actions;
  j["total_mistakes"] = r.total_mistakes;
  j["coverage"] = {{"visited", r.stages_visited}, {"total", r.stages_total}};
  j["stages"] = ojson::array();
  for (const auto& s : r.stages) {
    j["stages"].push_back({{"stage", s.stage},
                           {"attempts", s.attempts},
                           {"mistakes", s.mistakes},
                           {"cues_shown", s.cues_shown}});
  }
  const auto action = [](const ActionInstance& a) {
    return ojson{{"kind", action_kind_id(a.kind)},
                 {"param", a.param ? ojson(*a.param) : ojson(nullptr)}};
  };
  j["mistakes"] = ojson::array();
  for (const auto& m : r.mistakes) {
    ojson correct = ojson::array();
    for (const auto& c : m.correct) correct.push_back(action(c));
    j["mistakes"].push_back({{"step", m.step},
                             {"stage", m.stage},
                             {"chosen", action(m.chosen)},
                             {"cause", mistake_cause_id(m.cause)},
                             {"fatal", m.fatal},
                             {"correct", correct},
                             {"note", m.note}});
  }
  return j.dump(2);
}

}  // namespace retain
