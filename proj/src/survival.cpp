#include "retain/analytics.hpp"
#include "retain/engine.hpp"
#include "retain/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <unordered_map>

namespace retain {

std::vector<ActionInstance> menu_leaves(const Stage& stage) {
  std::vector<ActionInstance> leaves;
  for (const auto& entry : stage.menu) {
    if (const ParamSpec* spec = param_spec(entry.kind)) {
      for (const auto& v : spec->allowed_values) leaves.push_back({entry.kind, v.label});
    } else {
      leaves.push_back({entry.kind, std::nullopt});
    }
  }
  return leaves;
}

namespace {

// Walks every branch of the random trainee's play-through. Judging is done
// here from the menu entries directly rather than through the engine, so the
// two estimators share only the scenario model.
class OutcomeTree {
public:
  OutcomeTree(const Scenario& scenario, const SessionConfig& config, std::uint64_t budget)
    : scenario_(scenario), config_(config), budget_(budget) {}

  double survival() { return visit(scenario_.stage(scenario_.initial_stage), 0, 0); }
  std::uint64_t nodes() const { return nodes_; }

private:
  struct Leaf {
    bool correct;
  };

  const std::vector<Leaf>& leaves_of(const Stage& stage) {
    auto it = cache_.find(&stage);
    if (it != cache_.end()) return it->second;
    std::vector<Leaf> leaves;
    for (const auto& entry : stage.menu) {
      const ParamSpec* spec = param_spec(entry.kind);
      if (spec == nullptr) {
        leaves.push_back({entry.correct});
        continue;
      }
      for (const auto& v : spec->allowed_values) {
        leaves.push_back({entry.correct && (!entry.param || *entry.param == v.label)});
      }
    }
    return cache_.emplace(&stage, std::move(leaves)).first->second;
  }

  // Probability of reaching SAVE from this node.
  double visit(const Stage& stage, int mistakes, int attempts) {
    if (++nodes_ > budget_) {
      throw Error(ErrorKind::BudgetExceeded,
                  "outcome tree for '" + scenario_.id + "' exceeds " + std::to_string(budget_) +
                      " nodes");
    }
    const std::vector<Leaf>& leaves = leaves_of(stage);
    const double share = 1.0 / static_cast<double>(leaves.size());
    const bool late =
        config_.timing_enforced && stage.time_budget && attempts >= *stage.time_budget;

    double total = 0.0;
    for (const Leaf& leaf : leaves) {
      if (leaf.correct && !late) {
        InfantVitals v = stage.vitals;
        v.health = health_level(mistakes, config_.max_mistakes);
        const Transition* t = stage.select_transition(v);
        if (t == nullptr) continue;
        if (t->to_save()) {
          total += share;
        } else {
          total += share * visit(scenario_.stage(t->target), mistakes, 0);
        }
      } else if (mistakes + 1 < config_.max_mistakes) {
        total += share * visit(stage, mistakes + 1, late ? 0 : attempts + 1);
      }
    }
    return total;
  }

  const Scenario& scenario_;
  SessionConfig config_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::unordered_map<const Stage*, std::vector<Leaf>> cache_;
};

// Unbiased draw in [0, n) by rejection; independent of the standard
// library's distribution implementation.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kBlocks = 64;

}  // namespace

SurvivalEstimate exact_survival(const Scenario& scenario, const SessionConfig& config,
                                std::uint64_t node_budget) {
  ValidationReport report = validate_scenario(scenario);
  if (!report.ok()) {
    throw Error(ErrorKind::InvalidScenario, "scenario '" + scenario.id + "' is invalid:\n" +
                                                report.summary());
  }
  if (config.max_mistakes < 1) {
    throw Error(ErrorKind::InvalidArgument, "max_mistakes must be at least 1");
  }
  OutcomeTree tree(scenario, config, node_budget);
  SurvivalEstimate est;
  est.probability = tree.survival();
  est.exact = true;
  est.nodes = tree.nodes();
  return est;
}

SurvivalEstimate estimate_difficulty(const Scenario& scenario, std::uint64_t trials,
                                     std::uint64_t seed, const SessionConfig& config,
                                     unsigned threads) {
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be at least 1");
  // Validates once; trials then use the unchecked constructor.
  const SessionState initial = start_session(scenario, config);

  std::unordered_map<std::string, std::vector<ActionInstance>> leaves;
  for (const auto& stage : scenario.stages) leaves.emplace(stage.id, menu_leaves(stage));

  // Trials are split into fixed blocks, each with its own generator, so the
  // survivor count is the same whatever the thread count or schedule.
  const std::uint64_t blocks = std::min(kBlocks, trials);
  std::vector<std::uint64_t> survivors(blocks, 0);
  std::atomic<std::uint64_t> next_block{0};

  const auto worker = [&] {
    for (std::uint64_t b = next_block++; b < blocks; b = next_block++) {
      const std::uint64_t begin = trials * b / blocks;
      const std::uint64_t end = trials * (b + 1) / blocks;
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(b)));
      std::uint64_t saved = 0;
      for (std::uint64_t t = begin; t < end; ++t) {
        SessionState state = initial;
        while (!state.ended()) {
          const auto& options = leaves.at(state.stage);
          apply_action(scenario, state, options[uniform_index(rng, options.size())]);
        }
        if (state.outcome == Outcome::Saved) ++saved;
      }
      survivors[b] = saved;
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::uint64_t saved = 0;
  for (auto s : survivors) saved += s;
  SurvivalEstimate est;
  est.trials = trials;
  est.probability = static_cast<double>(saved) / static_cast<double>(trials);
  est.standard_error =
      std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(trials));
  return est;
}

}  // namespace retain
