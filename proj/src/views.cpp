#include "retain/analytics.hpp"
#include "retain/error.hpp"
#include "retain/guidance.hpp"
#include "retain/service.hpp"

namespace retain {

using ojson = nlohmann::ordered_json;

ojson action_json(const ActionInstance& a) {
  return ojson{{"kind", action_kind_id(a.kind)},
               {"param", a.param ? ojson(*a.param) : ojson(nullptr)}};
}

ActionInstance action_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorKind::InvalidArgument, "action must be an object with a string 'kind'");
  }
  const std::string kind = j["kind"].get<std::string>();
  auto parsed = parse_action_kind(kind);
  if (!parsed) throw Error(ErrorKind::UnknownAction, "unknown action kind '" + kind + "'");
  ActionInstance a{*parsed, std::nullopt};
  if (j.contains("param") && !j["param"].is_null()) {
    if (!j["param"].is_string()) throw Error(ErrorKind::InvalidArgument, "'param' must be a string");
    a.param = j["param"].get<std::string>();
  }
  return a;
}

ojson config_json(const SessionConfig& c) {
  return ojson{{"max_mistakes", c.max_mistakes},
               {"timing_enforced", c.timing_enforced},
               {"seed", c.seed}};
}

SessionConfig config_from_json(const nlohmann::json& j) {
  SessionConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "'config' must be an object");
  try {
    if (j.contains("max_mistakes")) c.max_mistakes = j["max_mistakes"].get<int>();
    if (j.contains("timing_enforced")) c.timing_enforced = j["timing_enforced"].get<bool>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("bad config: ") + e.what());
  }
  if (c.max_mistakes < 1) throw Error(ErrorKind::InvalidArgument, "max_mistakes must be >= 1");
  return c;
}

ojson feedback_json(const FeedbackEvent& e) {
  return ojson{{"kind", feedback_kind_id(e.kind)},
               {"utterance", e.utterance ? ojson(*e.utterance) : ojson(nullptr)},
               {"audio_cue", e.audio_cue}};
}

ojson scenario_summary_json(const Scenario& s) {
  ojson j{{"id", s.id}, {"title", s.title}, {"tier", s.difficulty_tier},
          {"guidance", guidance_mode_id(s.guidance)}};
  j["metrics"] = {{"optimal_path_length", s.declared_metrics.optimal_path_length},
                  {"distinct_actions", s.declared_metrics.distinct_actions}};
  return j;
}

ojson session_view_json(const Scenario& scenario, const SessionState& state) {
  ojson j;
  j["scenario"] = {{"id", scenario.id}, {"title", scenario.title},
                   {"tier", scenario.difficulty_tier}};
  const Stage& stage = scenario.stage(state.stage);
  j["stage"] = {{"id", state.position()}, {"prompt", stage.prompt}};
  const InfantVitals v = current_vitals(scenario, state);
  j["vitals"] = {{"heart_rate", v.heart_rate},
                 {"breathing", breathing_id(v.breathing)},
                 {"tone", tone_id(v.tone)},
                 {"health", v.health},
                 {"max_health", kFullHealth}};
  j["menu"] = ojson::array();
  if (!state.ended()) {
    for (const auto& choice : legal_actions(scenario, state)) {
      ojson item{{"kind", action_kind_id(choice.kind)}, {"label", action_kind_label(choice.kind)}};
      ojson params = ojson::array();
      if (const ParamSpec* spec = param_spec(choice.kind)) {
        item["param_name"] = spec->name;
        for (const auto& p : spec->allowed_values) {
          params.push_back({{"value", p.label}, {"label", p.description}});
        }
      }
      item["params"] = std::move(params);
      j["menu"].push_back(std::move(item));
    }
  }
  if (auto cue = next_cue(scenario, state)) {
    j["cue"] = {{"text", cue->text},
                {"names_correct_action", cue->names_correct_action},
                {"audio", cue->audio ? ojson(*cue->audio) : ojson(nullptr)}};
  } else {
    j["cue"] = nullptr;
  }
  j["mistakes"] = state.mistakes;
  j["max_mistakes"] = state.config.max_mistakes;
  j["step"] = state.step_index;
  j["outcome"] = outcome_id(state.outcome);
  return j;
}

}  // namespace retain
