// Operator and author tooling over the retain C API: validate, metrics,
// headless play, simulate, debrief and serve.

#include "retain/retain.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <pthread.h>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct LibraryDeleter {
  void operator()(retain_library* p) const { retain_library_free(p); }
};
struct SessionDeleter {
  void operator()(retain_session* p) const { retain_session_free(p); }
};
struct ServerDeleter {
  void operator()(retain_server* p) const { retain_server_free(p); }
};
using LibraryPtr = std::unique_ptr<retain_library, LibraryDeleter>;
using SessionPtr = std::unique_ptr<retain_session, SessionDeleter>;
using ServerPtr = std::unique_ptr<retain_server, ServerDeleter>;

// Thrown to unwind a command with a diagnostic and an exit code.
struct CommandFailure {
  int exit_code;
  std::string message;
};

int exit_code_for(retain_status status) {
  switch (status) {
    case RETAIN_OK: return kExitOk;
    case RETAIN_E_INVALID_ARGUMENT:
    case RETAIN_E_NOT_FOUND:
    case RETAIN_E_IO: return kExitUsage;
    default: return kExitDomain;
  }
}

void check(retain_status status) {
  if (status != RETAIN_OK) {
    throw CommandFailure{exit_code_for(status),
                         std::string(retain_status_name(status)) + ": " + retain_last_error()};
  }
}

// Takes ownership of a string returned by the library.
std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  retain_string_free(s);
  return out;
}

LibraryPtr open_library(const std::string& dir) {
  retain_library* lib = nullptr;
  check(retain_library_load(dir.c_str(), &lib));
  return LibraryPtr(lib);
}

retain_config make_config(int max_mistakes, bool timing, std::uint64_t seed) {
  retain_config config;
  retain_config_default(&config);
  config.max_mistakes = max_mistakes;
  config.timing_enforced = timing ? 1 : 0;
  config.seed = seed;
  return config;
}

// validate --------------------------------------------------------------------

std::vector<std::string> expand_paths(const std::vector<std::string>& paths) {
  std::vector<std::string> files;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".retain") {
          found.push_back(entry.path().string());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  return files;
}

int cmd_validate(const std::vector<std::string>& paths, bool structured) {
  int exit_code = kExitOk;
  json reports = json::array();
  for (const auto& file : expand_paths(paths)) {
    char* raw = nullptr;
    const retain_status status = retain_validate_file(file.c_str(), &raw);
    if (status == RETAIN_E_NOT_FOUND || status == RETAIN_E_INVALID_ARGUMENT) {
      exit_code = kExitUsage;
      if (structured) {
        reports.push_back(json{{"file", file}, {"ok", false}, {"diagnostics", json::array({retain_last_error()})}});
      } else {
        std::cerr << retain_last_error() << "\n";
      }
      continue;
    }
    json report = json::parse(take(raw));
    if (status != RETAIN_OK) {
      if (exit_code == kExitOk) exit_code = exit_code_for(status);
      if (report["diagnostics"].empty()) report["diagnostics"].push_back(retain_last_error());
    }
    if (structured) {
      reports.push_back(report);
    } else if (status == RETAIN_OK) {
      std::cout << "ok    " << file << "\n";
    } else {
      std::cout << "FAIL  " << file << "\n";
      for (const auto& d : report["diagnostics"]) std::cout << "  " << d.get<std::string>() << "\n";
    }
  }
  if (structured) std::cout << json{{"files", reports}, {"ok", exit_code == kExitOk}}.dump(2) << "\n";
  return exit_code;
}

// metrics ---------------------------------------------------------------------

int cmd_metrics(const std::string& library_dir, std::uint64_t node_budget, bool structured) {
  LibraryPtr lib = open_library(library_dir);
  char* raw = nullptr;
  check(retain_library_metrics(lib.get(), node_budget, &raw));
  const json metrics = json::parse(take(raw));
  if (structured) {
    std::cout << metrics.dump(2) << "\n";
    return kExitOk;
  }
  std::cout << std::left << std::setw(6) << "tier" << std::setw(28) << "scenario" << std::setw(9)
            << "optimal" << std::setw(10) << "distinct"
            << "exact_survival\n";
  for (const auto& row : metrics["rows"]) {
    std::ostringstream survival;
    if (row["exact_survival"].is_null()) {
      survival << "over budget";
    } else {
      survival << std::setprecision(6) << row["exact_survival"].get<double>();
    }
    std::cout << std::left << std::setw(6) << row["tier"].get<int>() << std::setw(28)
              << row["id"].get<std::string>() << std::setw(9)
              << row["optimal_path_length"].get<int>() << std::setw(10)
              << row["distinct_actions"].get<int>() << survival.str() << "\n";
  }
  if (!metrics["rows"].empty()) {
    std::cout << "vocabulary (" << metrics["vocabulary"].size() << "):";
    for (const auto& k : metrics["vocabulary"]) std::cout << " " << k.get<std::string>();
    std::cout << "\n";
  }
  return kExitOk;
}

// play ------------------------------------------------------------------------

// Reads a menu selection in [0, count]; 0 is accepted only when allow_back.
// Returns nullopt on end of input.
std::optional<int> read_choice(std::istream& in, int count, bool allow_back) {
  for (;;) {
    std::cout << "> " << std::flush;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    std::istringstream parse(line);
    int n = 0;
    std::string rest;
    if (parse >> n && !(parse >> rest) && n <= count && (n >= 1 || (allow_back && n == 0))) {
      return n;
    }
    std::cout << "Invalid choice: enter a number from " << (allow_back ? 0 : 1) << " to " << count
              << ".\n";
  }
}

void print_view(const json& view) {
  const auto& stage = view["stage"];
  const auto& vitals = view["vitals"];
  std::cout << "\n== " << stage["id"].get<std::string>() << " ==\n";
  std::cout << stage["prompt"].get<std::string>() << "\n";
  std::cout << "Vitals: heart rate " << vitals["heart_rate"].get<int>() << " bpm, breathing "
            << vitals["breathing"].get<std::string>() << ", tone "
            << vitals["tone"].get<std::string>() << ", health " << vitals["health"].get<int>()
            << "/" << vitals["max_health"].get<int>() << "\n";
  std::cout << "Mistakes: " << view["mistakes"].get<int>() << "/"
            << view["max_mistakes"].get<int>() << "\n";
  if (!view["cue"].is_null()) {
    std::cout << "Doctor: " << view["cue"]["text"].get<std::string>() << "\n";
  }
  int i = 1;
  for (const auto& item : view["menu"]) {
    std::cout << "  " << i++ << ") " << item["label"].get<std::string>();
    if (item.contains("param_name")) std::cout << " ...";
    std::cout << "\n";
  }
}

// Returns the chosen (kind, param) or nullopt on end of input.
std::optional<std::pair<std::string, std::optional<std::string>>> choose_action(
    std::istream& in, const json& view) {
  const auto& menu = view["menu"];
  for (;;) {
    auto pick = read_choice(in, static_cast<int>(menu.size()), false);
    if (!pick) return std::nullopt;
    const json& item = menu[static_cast<std::size_t>(*pick - 1)];
    const std::string kind = item["kind"].get<std::string>();
    const auto& params = item["params"];
    if (params.empty()) return std::make_pair(kind, std::optional<std::string>());
    std::cout << item["label"].get<std::string>() << ": choose "
              << item["param_name"].get<std::string>() << "\n";
    int j = 1;
    for (const auto& p : params) {
      std::cout << "  " << j++ << ") " << p["value"].get<std::string>() << " ("
                << p["label"].get<std::string>() << ")\n";
    }
    std::cout << "  0) back\n";
    auto sub = read_choice(in, static_cast<int>(params.size()), true);
    if (!sub) return std::nullopt;
    if (*sub == 0) {
      print_view(view);
      continue;
    }
    return std::make_pair(kind, std::optional<std::string>(
                                    params[static_cast<std::size_t>(*sub - 1)]["value"]));
  }
}

int cmd_play(const std::string& library_dir, const std::string& scenario_id,
             const retain_config& config, const std::string& log_dir,
             const std::string& log_file) {
  LibraryPtr lib = open_library(library_dir);
  retain_session* raw_session = nullptr;
  check(retain_session_start(lib.get(), scenario_id.c_str(), &config, &raw_session));
  SessionPtr session(raw_session);

  char* raw = nullptr;
  check(retain_session_view(session.get(), &raw));
  json view = json::parse(take(raw));
  std::cout << view["scenario"]["title"].get<std::string>() << "\n";

  std::string outcome = "ongoing";
  while (outcome == "ongoing") {
    print_view(view);
    auto action = choose_action(std::cin, view);
    if (!action) {
      check(retain_session_abandon(session.get()));
      std::cout << "\nInput closed; session abandoned.\n";
    } else {
      const char* param = action->second ? action->second->c_str() : nullptr;
      check(retain_session_apply(session.get(), action->first.c_str(), param, &raw));
      const json feedback = json::parse(take(raw));
      const std::string kind = feedback["kind"].get<std::string>();
      if (kind == "correct" || kind == "save") {
        std::cout << "Correct.\n";
      } else {
        std::cout << "[alarm] " << feedback["utterance"].get<std::string>() << "\n";
      }
    }
    check(retain_session_view(session.get(), &raw));
    view = json::parse(take(raw));
    outcome = view["outcome"].get<std::string>();
  }

  const int mistakes = view["mistakes"].get<int>();
  if (outcome == "saved") {
    std::cout << "\nSAVED with " << mistakes << " mistake" << (mistakes == 1 ? "" : "s") << ".\n";
  } else if (outcome == "died") {
    std::cout << "\nDIED after " << mistakes << " mistakes.\n";
  } else {
    std::cout << "\nABANDONED with " << mistakes << " mistake" << (mistakes == 1 ? "" : "s")
              << ".\n";
  }

  check(retain_session_log(session.get(), &raw));
  const std::string jsonl = take(raw);
  fs::path path = log_file;
  if (path.empty()) {
    const json header = json::parse(jsonl.substr(0, jsonl.find('\n')));
    path = fs::path(log_dir) / (scenario_id + "-" +
                                std::to_string(header["started_at_ms"].get<std::int64_t>()) +
                                ".jsonl");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  check(retain_session_write_log(session.get(), path.string().c_str()));
  std::cout << "Log: " << path.string() << "\n";
  return kExitOk;
}

// simulate / debrief ----------------------------------------------------------

int cmd_simulate(const std::string& library_dir, const std::string& scenario_id,
                 std::uint64_t trials, std::uint64_t seed, const retain_config& config,
                 unsigned threads, bool structured) {
  LibraryPtr lib = open_library(library_dir);
  char* raw = nullptr;
  check(retain_simulate(lib.get(), scenario_id.c_str(), trials, seed, &config, threads, &raw));
  const json result = json::parse(take(raw));
  if (structured) {
    std::cout << result.dump(2) << "\n";
  } else {
    std::cout << "scenario        " << result["scenario"].get<std::string>() << "\n"
              << "trials          " << result["trials"].get<std::uint64_t>() << "\n"
              << "seed            " << result["seed"].get<std::uint64_t>() << "\n"
              << std::setprecision(8)
              << "survival        " << result["probability"].get<double>() << "\n"
              << "standard error  " << result["standard_error"].get<double>() << "\n";
  }
  return kExitOk;
}

int cmd_debrief(const std::string& library_dir, const std::string& log_file, bool structured) {
  std::ifstream in(log_file, std::ios::binary);
  if (!in) throw CommandFailure{kExitUsage, log_file + ": not found"};
  std::ostringstream text;
  text << in.rdbuf();
  LibraryPtr lib = open_library(library_dir);
  char* raw = nullptr;
  check(retain_debrief(lib.get(), text.str().c_str(), structured ? 1 : 0, &raw));
  std::cout << take(raw);
  if (structured) std::cout << "\n";
  return kExitOk;
}

// serve -----------------------------------------------------------------------

int cmd_serve(const std::string& library_dir, const std::string& host, int port,
              const std::string& log_dir, std::uint64_t ttl_seconds,
              const std::string& static_dir) {
  // Block termination signals so a dedicated thread can receive them and
  // stop the server outside signal context.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  retain_server_options options{};
  options.host = host.c_str();
  options.port = port;
  options.log_dir = log_dir.c_str();
  options.ttl_seconds = ttl_seconds;
  options.static_dir = static_dir.empty() ? nullptr : static_dir.c_str();
  retain_server* raw = nullptr;
  check(retain_server_create(library_dir.c_str(), &options, &raw));
  ServerPtr server(raw);

  std::cout << "listening on http://" << host << ":" << retain_server_port(server.get())
            << "/api/v1" << std::endl;
  std::thread waiter([&] {
    int received = 0;
    sigwait(&signals, &received);
    retain_server_stop(server.get());
  });
  const retain_status status = retain_server_run(server.get());
  // Wake the waiter if the server stopped for another reason.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  check(status);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neonatal resuscitation trainer tooling"};
  app.require_subcommand(1);

  std::string library_dir = "scenarios";
  std::string format = "text";
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--library", library_dir, "Scenario library directory")
        ->envname("RETAIN_LIBRARY");
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"text", "structured"}));
  };

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "Parse and validate scenario files");
  validate->add_option("paths", validate_paths, "Files or directories")->required();
  validate->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"text", "structured"}));

  std::uint64_t node_budget = 10'000'000;
  auto* metrics = app.add_subcommand("metrics", "Print scenario metrics");
  add_common(metrics);
  metrics->add_option("--node-budget", node_budget, "Exact enumeration node budget");

  std::string scenario_id;
  int max_mistakes = 4;
  bool timing = false;
  std::uint64_t seed = 0;
  std::string log_dir = "retain-logs";
  std::string log_file;
  auto add_session = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_id, "Scenario id")->required();
    cmd->add_option("--max-mistakes", max_mistakes, "Mistakes that end the session")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--timing", timing, "Enforce per-stage time budgets");
    cmd->add_option("--seed", seed, "Seed");
  };

  auto* play = app.add_subcommand("play", "Play a scenario from the terminal");
  add_common(play);
  add_session(play);
  play->add_option("--log-dir", log_dir, "Directory for the session log");
  play->add_option("--log", log_file, "Explicit session log path");

  std::uint64_t trials = 100'000;
  unsigned threads = 0;
  auto* simulate = app.add_subcommand("simulate", "Estimate survival under random play");
  add_common(simulate);
  add_session(simulate);
  simulate->add_option("--trials", trials, "Number of sessions")->check(CLI::PositiveNumber);
  simulate->add_option("--threads", threads, "Worker threads (0: all cores)");

  std::string debrief_log;
  auto* debrief = app.add_subcommand("debrief", "Summarize an ended session log");
  add_common(debrief);
  debrief->add_option("logfile", debrief_log, "Session log (JSON Lines)")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t ttl_seconds = 3600;
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP session service");
  add_common(serve);
  serve->add_option("--host", host, "Bind address")->envname("RETAIN_HOST");
  serve->add_option("--port", port, "Port (0: any free port)")->envname("RETAIN_PORT");
  serve->add_option("--log-dir", log_dir, "Session log directory")->envname("RETAIN_LOG_DIR");
  serve->add_option("--ttl", ttl_seconds, "Idle session expiry in seconds")
      ->envname("RETAIN_TTL")
      ->check(CLI::PositiveNumber);
  serve->add_option("--static", static_dir, "Directory of static files served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const bool structured = format == "structured";
  try {
    if (*validate) return cmd_validate(validate_paths, structured);
    if (*metrics) return cmd_metrics(library_dir, node_budget, structured);
    const retain_config config = make_config(max_mistakes, timing, seed);
    if (*play) return cmd_play(library_dir, scenario_id, config, log_dir, log_file);
    if (*simulate) {
      return cmd_simulate(library_dir, scenario_id, trials, seed, config, threads, structured);
    }
    if (*debrief) return cmd_debrief(library_dir, debrief_log, structured);
    if (*serve) return cmd_serve(library_dir, host, port, log_dir, ttl_seconds, static_dir);
  } catch (const CommandFailure& f) {
    std::cerr << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
