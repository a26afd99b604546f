#pragma once

#include "retain/model.hpp"
#include "retain/session.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace retain {

// ---------------------------------------------------------------------------
// Session log files (JSON Lines: header on line 0, one record per line)
// ---------------------------------------------------------------------------

std::string log_header_line(const LogHeader& header);
std::string log_record_line(const LogRecord& record);
std::string log_to_jsonl(const SessionLog& log);
// Throws Error(Parse) with the offending line number.
SessionLog log_from_jsonl(std::string_view text);

void write_log_file(const std::filesystem::path& path, const SessionLog& log);
SessionLog read_log_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Debrief
// ---------------------------------------------------------------------------

enum class MistakeCause : std::uint8_t { WrongAction, WrongParam, Late };

std::string_view mistake_cause_id(MistakeCause c) noexcept;

struct StageDebrief {
  std::string stage;
  int attempts = 0;
  int mistakes = 0;
  int cues_shown = 0;
};

struct MistakeDebrief {
  int step = 0;
  std::string stage;
  ActionInstance chosen;
  MistakeCause cause = MistakeCause::WrongAction;
  bool fatal = false;
  std::vector<ActionInstance> correct;  // what would have been right here
  std::string note;                     // e.g. "chose 5:1, correct was 3:1"
};

struct DebriefReport {
  std::string scenario_id;
  std::string scenario_title;
  Outcome outcome = Outcome::Ongoing;
  int total_actions = 0;
  int total_mistakes = 0;
  std::vector<StageDebrief> stages;  // in visit order
  std::vector<MistakeDebrief> mistakes;
  int stages_visited = 0;
  int stages_total = 0;
};

// Replays the log (propagating ReplayDivergence) and summarises it.
DebriefReport debrief_report(const SessionLog& log, const Scenario& scenario);
std::string render_debrief_text(const DebriefReport& report);
std::string render_debrief_json(const DebriefReport& report);

// ---------------------------------------------------------------------------
// Difficulty under a uniformly random trainee
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultNodeBudget = 10'000'000;

struct SurvivalEstimate {
  double probability = 0.0;
  std::uint64_t trials = 0;     // Monte-Carlo trials; 0 for exact results
  double standard_error = 0.0;  // 0 when exact
  bool exact = false;
  std::uint64_t nodes = 0;      // outcome-tree nodes visited (exact only)
};

// The policy picks uniformly among menu leaves, where a parameterized entry
// contributes one leaf per parameter value; picks are with replacement.

// Full enumeration of the outcome tree. Throws Error(BudgetExceeded) once
// more than node_budget nodes would be visited.
SurvivalEstimate exact_survival(const Scenario& scenario, const SessionConfig& config = {},
                                std::uint64_t node_budget = kDefaultNodeBudget);

// Seeded Monte-Carlo estimate through the engine. Results do not depend on
// the thread count (0 = hardware concurrency).
SurvivalEstimate estimate_difficulty(const Scenario& scenario, std::uint64_t trials,
                                     std::uint64_t seed, const SessionConfig& config = {},
                                     unsigned threads = 0);

// Menu leaves of a stage, in authored order.
std::vector<ActionInstance> menu_leaves(const Stage& stage);

}  // namespace retain
