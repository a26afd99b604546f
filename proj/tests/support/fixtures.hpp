#pragma once

#include "retain/dsl.hpp"
#include "retain/engine.hpp"
#include "retain/model.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#ifndef RETAIN_SCENARIO_DIR
#error "RETAIN_SCENARIO_DIR must point at the bundled scenario directory"
#endif

namespace retain::testing {

inline const std::filesystem::path kScenarioDir = RETAIN_SCENARIO_DIR;

inline const ScenarioLibrary& bundled() {
  static const ScenarioLibrary library = load_library(kScenarioDir);
  return library;
}

inline const Scenario& bundled(std::string_view id) {
  const Scenario* s = bundled().find(id);
  if (s == nullptr) throw std::runtime_error("bundled scenario missing: " + std::string(id));
  return *s;
}

inline const Scenario& tutorial() { return bundled("tutorial"); }
inline const Scenario& s1() { return bundled("s1_apneic_newborn"); }
inline const Scenario& s2() { return bundled("s2_poor_chest_rise"); }
inline const Scenario& s3() { return bundled("s3_cardiac_compromise"); }

// A one-stage scenario: stimulate is correct, suction is wrong.
inline constexpr std::string_view kMinimalSource = R"(scenario mini {
  tier 1;
  initial only;
  metrics 1 1;
  stage only {
    prompt "Apneic newborn.";
    vitals heart_rate=90 breathing=apneic tone=floppy;
    entry stimulate correct;
    entry suction wrong;
    next SAVE;
  }
}
)";

inline Scenario minimal_scenario() { return parse_scenario(kMinimalSource); }

// Single stage with two equally likely leaves, one correct.
inline Scenario coin_scenario() {
  Scenario s = minimal_scenario();
  s.id = "coin";
  s.stages[0].menu[1] = {ActionKind::AssessHeartRate, std::nullopt, false, {}, {}};
  return s;
}

// A private scratch directory removed when the fixture goes away.
class TempDir {
public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("retain-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path write(const std::string& name, std::string_view content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

private:
  std::filesystem::path path_;
};

// Actions along the 0-mistake route.
inline std::vector<ActionInstance> perfect_actions(const Scenario& s) {
  return optimal_path(s).actions;
}

// A wrong action at the current stage (a wrong entry, or a wrong parameter).
inline ActionInstance some_wrong_action(const Scenario& scenario, const SessionState& state) {
  const Stage& stage = scenario.stage(state.stage);
  for (const auto& e : stage.menu) {
    if (!e.correct) {
      ActionInstance a{e.kind, std::nullopt};
      if (const ParamSpec* spec = param_spec(e.kind)) a.param = spec->allowed_values.front().label;
      return a;
    }
  }
  for (const auto& e : stage.menu) {
    if (const ParamSpec* spec = param_spec(e.kind)) {
      for (const auto& v : spec->allowed_values) {
        if (v.label != e.param) return {e.kind, v.label};
      }
    }
  }
  throw std::runtime_error("stage '" + stage.id + "' has no wrong choice");
}

}  // namespace retain::testing
