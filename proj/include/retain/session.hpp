#pragma once

#include "retain/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace retain {

inline constexpr int kDefaultMaxMistakes = 4;
inline constexpr std::string_view kLogFormat = "retain-log/1";
// Generator used for every seeded run; recorded in log headers.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64";

struct SessionConfig {
  int max_mistakes = kDefaultMaxMistakes;
  bool timing_enforced = false;
  std::uint64_t seed = 0;

  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

enum class Outcome : std::uint8_t { Ongoing, Saved, Died, Abandoned };

enum class FeedbackKind : std::uint8_t {
  Correct,
  MistakeWrongAction,
  MistakeWrongParam,
  Death,
  Save,
};

std::string_view outcome_id(Outcome o) noexcept;
std::optional<Outcome> parse_outcome(std::string_view id) noexcept;
std::string_view feedback_kind_id(FeedbackKind k) noexcept;
std::optional<FeedbackKind> parse_feedback_kind(std::string_view id) noexcept;

struct FeedbackEvent {
  FeedbackKind kind = FeedbackKind::Correct;
  std::optional<std::string> utterance;
  bool audio_cue = false;  // bell tone; set for mistakes and death

  friend bool operator==(const FeedbackEvent&, const FeedbackEvent&) = default;
};

struct LogHeader {
  std::string format{kLogFormat};
  std::string scenario_id;
  SessionConfig config;
  std::string rng{kRngAlgorithm};
  std::int64_t started_at_ms = 0;  // wall clock, excluded from equivalence
  std::optional<std::string> session_id;

  friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

enum class RecordEvent : std::uint8_t { Action, Abandoned };

struct LogRecord {
  int step = 0;          // 0-based, strictly increasing
  int time = 0;          // logical time after the record
  RecordEvent event = RecordEvent::Action;
  std::string stage;     // stage the trainee was at
  std::optional<ActionInstance> action;
  std::optional<FeedbackKind> feedback;
  int mistakes = 0;      // after the record
  int health = kFullHealth;
  std::string next;      // stage after the record, or SAVE

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

// Append-only: the engine only ever pushes records.
struct SessionLog {
  LogHeader header;
  std::vector<LogRecord> records;

  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

struct SessionState {
  std::string scenario_id;
  std::string stage;  // current stage; the last stage once the session ends
  int mistakes = 0;
  int health = kFullHealth;
  int step_index = 0;
  int logical_time = 0;
  int stage_attempts = 0;  // actions taken at the current stage in this time window
  Outcome outcome = Outcome::Ongoing;
  SessionConfig config;
  SessionLog log;

  bool ended() const noexcept { return outcome != Outcome::Ongoing; }
  // Current stage id, or SAVE after a save.
  std::string position() const;

  friend bool operator==(const SessionState&, const SessionState&) = default;
};

// Field-for-field equality that ignores wall-clock timestamps.
bool equivalent(const SessionState& a, const SessionState& b);
// Log equality ignoring the header's wall clock and session id.
bool equivalent_logs(const SessionLog& a, const SessionLog& b);

// Health bar level (0..4) for a mistake count; 0 exactly when the infant has
// died.
int health_level(int mistakes, int max_mistakes) noexcept;

}  // namespace retain
