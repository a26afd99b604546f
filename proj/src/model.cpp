#include "retain/model.hpp"

#include "retain/error.hpp"

#include <algorithm>
#include <sstream>

namespace retain {

std::string_view error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::InvalidScenario: return "InvalidScenario";
    case ErrorKind::NoSavePath: return "NoSavePath";
    case ErrorKind::Library: return "LibraryError";
    case ErrorKind::SessionEnded: return "SessionEnded";
    case ErrorKind::UnknownAction: return "UnknownAction";
    case ErrorKind::ReplayDivergence: return "ReplayDivergence";
    case ErrorKind::InvalidChoice: return "InvalidChoice";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::NotEnded: return "NotEnded";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Contract: return "ContractViolation";
    case ErrorKind::Conflict: return "Conflict";
  }
  return "Unknown";
}

namespace {

struct KindInfo {
  ActionKind kind;
  std::string_view id;
  std::string_view label;
};

constexpr std::array<KindInfo, kActionKindCount> kKindInfo = {{
    {ActionKind::Stimulate, "stimulate", "warm, dry and stimulate"},
    {ActionKind::Suction, "suction", "suction the airway"},
    {ActionKind::AssessHeartRate, "assess_hr", "assess heart rate"},
    {ActionKind::PulseOximeter, "pulse_ox", "pulse oximeter placement"},
    {ActionKind::Ventilate, "ppv", "positive-pressure ventilation"},
    {ActionKind::AdjustAirway, "adjust_airway", "mask and airway adjustment"},
    {ActionKind::Oxygen, "oxygen", "supplemental oxygen"},
    {ActionKind::Compressions, "compressions", "chest compressions"},
    {ActionKind::Epinephrine, "epinephrine", "epinephrine"},
}};

std::vector<ParamSpec> make_param_specs() {
  return {
      {ActionKind::Suction, "order",
       {{"mouth-then-nose", "mouth first, then nose"}, {"nose-then-mouth", "nose first, then mouth"}}},
      {ActionKind::Ventilate, "rate",
       {{"20/min", "20 breaths per minute"},
        {"40-60/min", "40 to 60 breaths per minute"},
        {"100/min", "100 breaths per minute"}}},
      {ActionKind::Oxygen, "concentration",
       {{"21%", "room air"}, {"30%", "30 percent oxygen"}, {"100%", "100 percent oxygen"}}},
      {ActionKind::Compressions, "ratio",
       {{"3:1", "three compressions to one breath"},
        {"5:1", "five compressions to one breath"},
        {"15:2", "fifteen compressions to two breaths"}}},
      {ActionKind::Epinephrine, "route",
       {{"IV", "intravenous (umbilical venous catheter)"},
        {"ETT", "endotracheal tube"},
        {"IM", "intramuscular"}}},
  };
}

const std::vector<ParamSpec>& param_specs() {
  static const std::vector<ParamSpec> specs = make_param_specs();
  return specs;
}

}  // namespace

bool ParamSpec::allows(std::string_view label) const {
  return std::any_of(allowed_values.begin(), allowed_values.end(),
                     [&](const ParamValue& v) { return v.label == label; });
}

std::string_view action_kind_id(ActionKind kind) noexcept {
  return kKindInfo[static_cast<std::size_t>(kind)].id;
}

std::string_view action_kind_label(ActionKind kind) noexcept {
  return kKindInfo[static_cast<std::size_t>(kind)].label;
}

std::optional<ActionKind> parse_action_kind(std::string_view id) noexcept {
  for (const auto& info : kKindInfo) {
    if (info.id == id) return info.kind;
  }
  return std::nullopt;
}

bool is_parameterized(ActionKind kind) noexcept { return param_spec(kind) != nullptr; }

const ParamSpec* param_spec(ActionKind kind) noexcept {
  for (const auto& spec : param_specs()) {
    if (spec.kind == kind) return &spec;
  }
  return nullptr;
}

void check_action(const ActionInstance& action) {
  const ParamSpec* spec = param_spec(action.kind);
  const std::string kind(action_kind_id(action.kind));
  if (spec == nullptr) {
    if (action.param) {
      throw Error(ErrorKind::InvalidArgument, "action '" + kind + "' takes no parameter");
    }
    return;
  }
  if (!action.param) {
    throw Error(ErrorKind::InvalidArgument,
                "action '" + kind + "' requires a " + spec->name + " parameter");
  }
  if (!spec->allows(*action.param)) {
    throw Error(ErrorKind::InvalidArgument,
                "'" + *action.param + "' is not a valid " + spec->name + " for '" + kind + "'");
  }
}

std::string describe_action(const ActionInstance& action) {
  std::string out(action_kind_label(action.kind));
  if (action.param) out += " (" + *action.param + ")";
  return out;
}

std::string_view breathing_id(Breathing b) noexcept {
  switch (b) {
    case Breathing::Apneic: return "apneic";
    case Breathing::Gasping: return "gasping";
    case Breathing::Labored: return "labored";
    case Breathing::Regular: return "regular";
  }
  return "apneic";
}

std::string_view tone_id(Tone t) noexcept {
  switch (t) {
    case Tone::Floppy: return "floppy";
    case Tone::SomeFlexion: return "some_flexion";
    case Tone::Active: return "active";
  }
  return "floppy";
}

std::optional<Breathing> parse_breathing(std::string_view id) noexcept {
  for (auto b : {Breathing::Apneic, Breathing::Gasping, Breathing::Labored, Breathing::Regular}) {
    if (breathing_id(b) == id) return b;
  }
  return std::nullopt;
}

std::optional<Tone> parse_tone(std::string_view id) noexcept {
  for (auto t : {Tone::Floppy, Tone::SomeFlexion, Tone::Active}) {
    if (tone_id(t) == id) return t;
  }
  return std::nullopt;
}

std::string_view vital_field_id(VitalField f) noexcept {
  switch (f) {
    case VitalField::HeartRate: return "heart_rate";
    case VitalField::Breathing: return "breathing";
    case VitalField::Tone: return "tone";
    case VitalField::Health: return "health";
  }
  return "heart_rate";
}

std::string_view comparison_symbol(Comparison c) noexcept {
  switch (c) {
    case Comparison::Less: return "<";
    case Comparison::LessEqual: return "<=";
    case Comparison::Greater: return ">";
    case Comparison::GreaterEqual: return ">=";
    case Comparison::Equal: return "==";
    case Comparison::NotEqual: return "!=";
  }
  return "==";
}

bool Condition::holds(const InfantVitals& v) const noexcept {
  int lhs = 0;
  switch (field) {
    case VitalField::HeartRate: lhs = v.heart_rate; break;
    case VitalField::Breathing: lhs = static_cast<int>(v.breathing); break;
    case VitalField::Tone: lhs = static_cast<int>(v.tone); break;
    case VitalField::Health: lhs = v.health; break;
  }
  switch (op) {
    case Comparison::Less: return lhs < value;
    case Comparison::LessEqual: return lhs <= value;
    case Comparison::Greater: return lhs > value;
    case Comparison::GreaterEqual: return lhs >= value;
    case Comparison::Equal: return lhs == value;
    case Comparison::NotEqual: return lhs != value;
  }
  return false;
}

bool guard_holds(const Guard& guard, const InfantVitals& v) noexcept {
  return std::all_of(guard.begin(), guard.end(), [&](const Condition& c) { return c.holds(v); });
}

const MenuEntry* Stage::find_entry(ActionKind kind) const noexcept {
  for (const auto& e : menu) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

const Transition* Stage::select_transition(const InfantVitals& v) const noexcept {
  for (const auto& t : transitions) {
    if (guard_holds(t.guard, v)) return &t;
  }
  return nullptr;
}

std::string_view speaker_id(Speaker s) noexcept {
  return s == Speaker::Doctor ? "doctor" : "trainee";
}

std::optional<Speaker> parse_speaker(std::string_view id) noexcept {
  if (id == "doctor") return Speaker::Doctor;
  if (id == "trainee") return Speaker::Trainee;
  return std::nullopt;
}

const DialogueNode* DialogueTree::find(std::string_view id) const noexcept {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::string_view guidance_mode_id(GuidanceMode m) noexcept {
  return m == GuidanceMode::Complete ? "complete" : "partial";
}

const Stage* Scenario::find_stage(std::string_view stage_id) const noexcept {
  for (const auto& s : stages) {
    if (s.id == stage_id) return &s;
  }
  return nullptr;
}

const Stage& Scenario::stage(std::string_view stage_id) const {
  if (const Stage* s = find_stage(stage_id)) return *s;
  throw Error(ErrorKind::NotFound,
              "scenario '" + id + "' has no stage '" + std::string(stage_id) + "'");
}

const Scenario* ScenarioLibrary::find(std::string_view scenario_id) const noexcept {
  for (const auto& s : scenarios) {
    if (s.id == scenario_id) return &s;
  }
  return nullptr;
}

std::set<ActionKind> action_vocabulary(const ScenarioLibrary& library) {
  std::set<ActionKind> kinds;
  for (const auto& scenario : library.scenarios) {
    for (const auto& stage : scenario.stages) {
      for (const auto& entry : stage.menu) kinds.insert(entry.kind);
    }
  }
  return kinds;
}

}  // namespace retain
