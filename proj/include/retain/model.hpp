#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace retain {

// ---------------------------------------------------------------------------
// Action vocabulary
// ---------------------------------------------------------------------------

// The closed set of clinical actions a trainee can take. Order here is the
// canonical order used for listings and bitmasks.
enum class ActionKind : std::uint8_t {
  Stimulate,
  Suction,
  AssessHeartRate,
  PulseOximeter,
  Ventilate,
  AdjustAirway,
  Oxygen,
  Compressions,
  Epinephrine,
};

inline constexpr std::size_t kActionKindCount = 9;

inline constexpr std::array<ActionKind, kActionKindCount> kAllActionKinds = {
    ActionKind::Stimulate,     ActionKind::Suction,      ActionKind::AssessHeartRate,
    ActionKind::PulseOximeter, ActionKind::Ventilate,    ActionKind::AdjustAirway,
    ActionKind::Oxygen,        ActionKind::Compressions, ActionKind::Epinephrine,
};

struct ParamValue {
  std::string label;        // as written in scenario files and shown in menus
  std::string description;  // unit or longer wording for display
};

struct ParamSpec {
  ActionKind kind;
  std::string name;  // e.g. "ratio"
  std::vector<ParamValue> allowed_values;

  bool allows(std::string_view label) const;
};

// Token used in scenario files and logs, e.g. "compressions".
std::string_view action_kind_id(ActionKind kind) noexcept;
// Human wording, e.g. "chest compressions".
std::string_view action_kind_label(ActionKind kind) noexcept;
std::optional<ActionKind> parse_action_kind(std::string_view id) noexcept;

bool is_parameterized(ActionKind kind) noexcept;
// nullptr for kinds without a parameter.
const ParamSpec* param_spec(ActionKind kind) noexcept;

struct ActionInstance {
  ActionKind kind = ActionKind::Stimulate;
  std::optional<std::string> param;

  friend bool operator==(const ActionInstance&, const ActionInstance&) = default;
};

// Throws Error(InvalidArgument) unless param is present exactly when the kind
// is parameterized and, when present, drawn from the kind's domain.
void check_action(const ActionInstance& action);
std::string describe_action(const ActionInstance& action);

// ---------------------------------------------------------------------------
// Vitals and guards
// ---------------------------------------------------------------------------

enum class Breathing : std::uint8_t { Apneic, Gasping, Labored, Regular };
enum class Tone : std::uint8_t { Floppy, SomeFlexion, Active };

inline constexpr int kFullHealth = 4;

std::string_view breathing_id(Breathing b) noexcept;
std::string_view tone_id(Tone t) noexcept;
std::optional<Breathing> parse_breathing(std::string_view id) noexcept;
std::optional<Tone> parse_tone(std::string_view id) noexcept;

struct InfantVitals {
  int heart_rate = 0;
  Breathing breathing = Breathing::Apneic;
  Tone tone = Tone::Floppy;
  int health = kFullHealth;

  friend bool operator==(const InfantVitals&, const InfantVitals&) = default;
};

enum class VitalField : std::uint8_t { HeartRate, Breathing, Tone, Health };
enum class Comparison : std::uint8_t { Less, LessEqual, Greater, GreaterEqual, Equal, NotEqual };

std::string_view vital_field_id(VitalField f) noexcept;
std::string_view comparison_symbol(Comparison c) noexcept;

// One comparison against a vitals field. Enum-valued fields compare by their
// ordinal, and only Equal/NotEqual are meaningful for them.
struct Condition {
  VitalField field = VitalField::HeartRate;
  Comparison op = Comparison::Less;
  int value = 0;

  bool holds(const InfantVitals& v) const noexcept;
  friend bool operator==(const Condition&, const Condition&) = default;
};

// Conjunction of conditions; empty means "always".
using Guard = std::vector<Condition>;

bool guard_holds(const Guard& guard, const InfantVitals& v) noexcept;

// ---------------------------------------------------------------------------
// Scenario structure
// ---------------------------------------------------------------------------

// Source position attached to parsed elements. Never participates in
// structural equality.
struct SourceLine {
  int value = 0;
  friend bool operator==(SourceLine, SourceLine) noexcept { return true; }
};

inline constexpr std::string_view kSaveTarget = "SAVE";

struct GuidanceCue {
  std::string text;
  bool names_correct_action = false;
  std::optional<std::string> audio;

  friend bool operator==(const GuidanceCue&, const GuidanceCue&) = default;
};

struct MenuEntry {
  ActionKind kind = ActionKind::Stimulate;
  // For correct parameterized entries: the only accepted value.
  std::optional<std::string> param;
  bool correct = false;
  std::optional<std::string> mistake_utterance;
  SourceLine line;

  friend bool operator==(const MenuEntry&, const MenuEntry&) = default;
};

struct Transition {
  Guard guard;
  std::string target;  // stage id or kSaveTarget
  SourceLine line;

  bool to_save() const noexcept { return target == kSaveTarget; }
  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Stage {
  std::string id;
  std::string prompt;
  InfantVitals vitals;
  std::vector<MenuEntry> menu;
  std::vector<Transition> transitions;
  std::optional<GuidanceCue> cue;
  // Logical-time budget for the stage, only enforced when the session asks.
  std::optional<int> time_budget;
  SourceLine line;

  const MenuEntry* find_entry(ActionKind kind) const noexcept;
  // First transition whose guard holds, in authored order.
  const Transition* select_transition(const InfantVitals& v) const noexcept;

  friend bool operator==(const Stage&, const Stage&) = default;
};

enum class Speaker : std::uint8_t { Doctor, Trainee };

std::string_view speaker_id(Speaker s) noexcept;
std::optional<Speaker> parse_speaker(std::string_view id) noexcept;

struct DialogueChoice {
  std::string label;
  std::string target;

  friend bool operator==(const DialogueChoice&, const DialogueChoice&) = default;
};

struct DialogueNode {
  std::string id;
  Speaker speaker = Speaker::Doctor;
  std::string text;
  std::vector<DialogueChoice> children;
  std::optional<std::string> audio;

  bool terminal() const noexcept { return children.empty(); }
  friend bool operator==(const DialogueNode&, const DialogueNode&) = default;
};

struct DialogueTree {
  std::string root;
  // Authored order is kept for canonical output.
  std::vector<DialogueNode> nodes;

  const DialogueNode* find(std::string_view id) const noexcept;
  friend bool operator==(const DialogueTree&, const DialogueTree&) = default;
};

enum class GuidanceMode : std::uint8_t { Complete, Partial };

std::string_view guidance_mode_id(GuidanceMode m) noexcept;

struct ScenarioMetrics {
  int optimal_path_length = 0;
  int distinct_actions = 0;

  friend bool operator==(const ScenarioMetrics&, const ScenarioMetrics&) = default;
};

struct Scenario {
  std::string id;
  std::string title;
  int difficulty_tier = 0;
  GuidanceMode guidance = GuidanceMode::Partial;
  std::string initial_stage;
  std::vector<Stage> stages;
  ScenarioMetrics declared_metrics;
  std::optional<DialogueTree> briefing;

  const Stage* find_stage(std::string_view stage_id) const noexcept;
  const Stage& stage(std::string_view stage_id) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ScenarioLibrary {
  std::vector<Scenario> scenarios;
  std::vector<std::filesystem::path> sources;
  std::vector<std::string> warnings;

  const Scenario* find(std::string_view scenario_id) const noexcept;
  bool empty() const noexcept { return scenarios.empty(); }
};

// ---------------------------------------------------------------------------
// Validation and metrics
// ---------------------------------------------------------------------------

enum class ViolationCode : std::uint8_t {
  InvalidHeader,
  DuplicateStage,
  UnknownInitialStage,
  EmptyMenu,
  DuplicateMenuKind,
  MissingCorrectEntry,
  CorrectParamMissing,
  InvalidParam,
  InvalidVitals,
  EmptyCue,
  InvalidTimeBudget,
  NoTransitions,
  MissingFallback,
  DanglingTransition,
  UnreachableStage,
  Cycle,
  NoSavePath,
  TutorialNotComplete,
  TutorialGuidanceIncomplete,
  PartialGuidanceFullyCued,
  MetricsMismatch,
  InvalidDialogue,
};

std::string_view violation_code_id(ViolationCode code) noexcept;

struct Violation {
  ViolationCode code;
  std::string message;
  std::string stage;  // empty for scenario-level problems
  int line = 0;       // 0 when unknown
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationCode code) const noexcept;
  std::string summary() const;
};

// Reports every structural problem it finds; never throws.
ValidationReport validate_scenario(const Scenario& scenario);

// Shortest 0-mistake route to SAVE with the actions chosen along it.
struct OptimalPath {
  ScenarioMetrics metrics;
  std::vector<std::string> stages;
  std::vector<ActionInstance> actions;
};

// Throws Error(NoSavePath) when the correct entries never reach SAVE.
OptimalPath optimal_path(const Scenario& scenario);
ScenarioMetrics compute_metrics(const Scenario& scenario);

std::set<ActionKind> action_vocabulary(const ScenarioLibrary& library);

}  // namespace retain
