#include "retain/retain.h"

#include "retain/analytics.hpp"
#include "retain/dsl.hpp"
#include "retain/engine.hpp"
#include "retain/error.hpp"
#include "retain/service.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>

using ojson = nlohmann::ordered_json;

struct retain_library {
  retain::ScenarioLibrary library;
};

struct retain_session {
  const retain::Scenario* scenario;
  retain::SessionState state;
};

struct retain_server {
  std::unique_ptr<retain::SessionService> service;
  std::unique_ptr<retain::HttpServer> http;
  int port = 0;
};

namespace {

thread_local std::string g_last_error;

retain_status status_of(retain::ErrorKind kind) {
  using retain::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return RETAIN_E_INVALID_ARGUMENT;
    case ErrorKind::Parse: return RETAIN_E_PARSE;
    case ErrorKind::InvalidScenario: return RETAIN_E_INVALID_SCENARIO;
    case ErrorKind::NoSavePath: return RETAIN_E_NO_SAVE_PATH;
    case ErrorKind::Library: return RETAIN_E_LIBRARY;
    case ErrorKind::SessionEnded: return RETAIN_E_SESSION_ENDED;
    case ErrorKind::UnknownAction: return RETAIN_E_UNKNOWN_ACTION;
    case ErrorKind::ReplayDivergence: return RETAIN_E_REPLAY_DIVERGENCE;
    case ErrorKind::InvalidChoice: return RETAIN_E_INVALID_CHOICE;
    case ErrorKind::BudgetExceeded: return RETAIN_E_BUDGET_EXCEEDED;
    case ErrorKind::NotFound: return RETAIN_E_NOT_FOUND;
    case ErrorKind::NotEnded: return RETAIN_E_NOT_ENDED;
    case ErrorKind::Io: return RETAIN_E_IO;
    case ErrorKind::Contract: return RETAIN_E_CONTRACT;
    case ErrorKind::Conflict: return RETAIN_E_CONFLICT;
  }
  return RETAIN_E_INTERNAL;
}

// Runs fn, translating exceptions into status codes at the C boundary.
template <typename Fn>
retain_status guard(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    fn();
    return RETAIN_OK;
  } catch (const retain::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RETAIN_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RETAIN_E_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) {
    throw retain::Error(retain::ErrorKind::InvalidArgument, std::string(what) + " is NULL");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

retain::SessionConfig to_config(const retain_config* c) {
  retain::SessionConfig config;
  if (c != nullptr) {
    config.max_mistakes = c->max_mistakes;
    config.timing_enforced = c->timing_enforced != 0;
    config.seed = c->seed;
  }
  return config;
}

const retain::Scenario& scenario_in(const retain_library* lib, const char* id) {
  require(lib, "library");
  require(id, "scenario id");
  const retain::Scenario* s = lib->library.find(id);
  if (s == nullptr) {
    throw retain::Error(retain::ErrorKind::NotFound, std::string("no scenario '") + id + "'");
  }
  return *s;
}

}  // namespace

extern "C" {

const char* retain_version(void) { return "1.0.0"; }

const char* retain_status_name(retain_status status) {
  switch (status) {
    case RETAIN_OK: return "OK";
    case RETAIN_E_INVALID_ARGUMENT: return "InvalidArgument";
    case RETAIN_E_PARSE: return "ParseError";
    case RETAIN_E_INVALID_SCENARIO: return "InvalidScenario";
    case RETAIN_E_NO_SAVE_PATH: return "NoSavePath";
    case RETAIN_E_LIBRARY: return "LibraryError";
    case RETAIN_E_SESSION_ENDED: return "SessionEnded";
    case RETAIN_E_UNKNOWN_ACTION: return "UnknownAction";
    case RETAIN_E_REPLAY_DIVERGENCE: return "ReplayDivergence";
    case RETAIN_E_INVALID_CHOICE: return "InvalidChoice";
    case RETAIN_E_BUDGET_EXCEEDED: return "BudgetExceeded";
    case RETAIN_E_NOT_FOUND: return "NotFound";
    case RETAIN_E_NOT_ENDED: return "NotEnded";
    case RETAIN_E_IO: return "IoError";
    case RETAIN_E_CONTRACT: return "ContractViolation";
    case RETAIN_E_INTERNAL: return "InternalError";
    case RETAIN_E_CONFLICT: return "Conflict";
  }
  return "Unknown";
}

const char* retain_last_error(void) { return g_last_error.c_str(); }

void retain_string_free(char* s) { std::free(s); }

void retain_config_default(retain_config* config) {
  if (config == nullptr) return;
  config->max_mistakes = retain::kDefaultMaxMistakes;
  config->timing_enforced = 0;
  config->seed = 0;
}

retain_status retain_library_load(const char* directory, retain_library** out) {
  return guard([&] {
    require(directory, "directory");
    require(out, "out");
    *out = nullptr;
    auto lib = std::make_unique<retain_library>();
    lib->library = retain::load_library(directory);
    *out = lib.release();
  });
}

retain_status retain_library_load_files(const char* const* paths, size_t count,
                                        retain_library** out) {
  return guard([&] {
    require(out, "out");
    if (count > 0) require(paths, "paths");
    *out = nullptr;
    auto lib = std::make_unique<retain_library>();
    std::vector<std::string> diagnostics;
    for (size_t i = 0; i < count; ++i) {
      require(paths[i], "path");
      try {
        retain::Scenario s = retain::load_scenario_file(paths[i]);
        if (lib->library.find(s.id) != nullptr) {
          diagnostics.push_back(std::string(paths[i]) + ": duplicate id '" + s.id + "'");
          continue;
        }
        lib->library.scenarios.push_back(std::move(s));
        lib->library.sources.emplace_back(paths[i]);
      } catch (const retain::LibraryError& e) {
        diagnostics.insert(diagnostics.end(), e.diagnostics().begin(), e.diagnostics().end());
      }
    }
    if (!diagnostics.empty()) throw retain::LibraryError(std::move(diagnostics));
    *out = lib.release();
  });
}

void retain_library_free(retain_library* library) { delete library; }

size_t retain_library_size(const retain_library* library) {
  return library == nullptr ? 0 : library->library.scenarios.size();
}

retain_status retain_library_json(const retain_library* library, char** out_json) {
  return guard([&] {
    require(library, "library");
    require(out_json, "out_json");
    ojson j;
    j["scenarios"] = ojson::array();
    for (const auto& s : library->library.scenarios) {
      j["scenarios"].push_back(retain::scenario_summary_json(s));
    }
    j["vocabulary"] = ojson::array();
    for (auto kind : retain::action_vocabulary(library->library)) {
      j["vocabulary"].push_back(retain::action_kind_id(kind));
    }
    j["warnings"] = library->library.warnings;
    *out_json = dup_string(j.dump());
  });
}

retain_status retain_library_metrics(const retain_library* library, uint64_t node_budget,
                                     char** out_json) {
  return guard([&] {
    require(library, "library");
    require(out_json, "out_json");
    ojson rows = ojson::array();
    for (const auto& s : library->library.scenarios) {
      const retain::ScenarioMetrics m = retain::compute_metrics(s);
      ojson row{{"id", s.id},
                {"tier", s.difficulty_tier},
                {"optimal_path_length", m.optimal_path_length},
                {"distinct_actions", m.distinct_actions}};
      try {
        row["exact_survival"] = retain::exact_survival(s, {}, node_budget).probability;
      } catch (const retain::Error& e) {
        if (e.kind() != retain::ErrorKind::BudgetExceeded) throw;
        row["exact_survival"] = nullptr;
      }
      rows.push_back(std::move(row));
    }
    ojson vocab = ojson::array();
    for (auto kind : retain::action_vocabulary(library->library)) {
      vocab.push_back(retain::action_kind_id(kind));
    }
    *out_json = dup_string(ojson{{"rows", rows}, {"vocabulary", vocab}}.dump());
  });
}

retain_status retain_validate_file(const char* path, char** out_report_json) {
  std::vector<std::string> diagnostics;
  retain_status status = guard([&] {
    require(path, "path");
    try {
      retain::load_scenario_file(path);
    } catch (const retain::LibraryError& e) {
      diagnostics = e.diagnostics();
      throw;
    }
  });
  if (status == RETAIN_E_NOT_FOUND || status == RETAIN_E_INVALID_ARGUMENT) return status;
  if (out_report_json != nullptr) {
    const std::string saved = g_last_error;
    retain_status made = guard([&] {
      ojson report{{"file", path}, {"ok", status == RETAIN_OK}, {"diagnostics", diagnostics}};
      *out_report_json = dup_string(report.dump());
    });
    if (made != RETAIN_OK) return made;
    g_last_error = saved;
  }
  return status;
}

retain_status retain_session_start(const retain_library* library, const char* scenario_id,
                                   const retain_config* config, retain_session** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    const retain::Scenario& scenario = scenario_in(library, scenario_id);
    auto session = std::make_unique<retain_session>();
    session->scenario = &scenario;
    session->state = retain::start_session(scenario, to_config(config));
    *out = session.release();
  });
}

void retain_session_free(retain_session* session) { delete session; }

retain_status retain_session_view(const retain_session* session, char** out_json) {
  return guard([&] {
    require(session, "session");
    require(out_json, "out_json");
    *out_json = dup_string(retain::session_view_json(*session->scenario, session->state).dump());
  });
}

retain_status retain_session_apply(retain_session* session, const char* kind, const char* param,
                                   char** out_feedback_json) {
  return guard([&] {
    require(session, "session");
    require(kind, "kind");
    auto parsed = retain::parse_action_kind(kind);
    if (!parsed) {
      throw retain::Error(retain::ErrorKind::UnknownAction,
                          std::string("unknown action kind '") + kind + "'");
    }
    retain::ActionInstance action{*parsed, std::nullopt};
    if (param != nullptr) action.param = param;
    retain::FeedbackEvent event = retain::apply_action(*session->scenario, session->state, action);
    if (out_feedback_json != nullptr) {
      *out_feedback_json = dup_string(retain::feedback_json(event).dump());
    }
  });
}

retain_status retain_session_abandon(retain_session* session) {
  return guard([&] {
    require(session, "session");
    retain::abandon_session(session->state);
  });
}

int retain_session_ongoing(const retain_session* session) {
  return session != nullptr && !session->state.ended() ? 1 : 0;
}

retain_status retain_session_log(const retain_session* session, char** out_jsonl) {
  return guard([&] {
    require(session, "session");
    require(out_jsonl, "out_jsonl");
    *out_jsonl = dup_string(retain::log_to_jsonl(session->state.log));
  });
}

retain_status retain_session_write_log(const retain_session* session, const char* path) {
  return guard([&] {
    require(session, "session");
    require(path, "path");
    retain::write_log_file(path, session->state.log);
  });
}

retain_status retain_exact_survival(const retain_library* library, const char* scenario_id,
                                    const retain_config* config, uint64_t node_budget,
                                    double* out_probability) {
  return guard([&] {
    require(out_probability, "out_probability");
    const retain::Scenario& s = scenario_in(library, scenario_id);
    *out_probability = retain::exact_survival(s, to_config(config), node_budget).probability;
  });
}

retain_status retain_simulate(const retain_library* library, const char* scenario_id,
                              uint64_t trials, uint64_t seed, const retain_config* config,
                              unsigned threads, char** out_json) {
  return guard([&] {
    require(out_json, "out_json");
    const retain::Scenario& s = scenario_in(library, scenario_id);
    retain::SurvivalEstimate est =
        retain::estimate_difficulty(s, trials, seed, to_config(config), threads);
    ojson j{{"scenario", s.id},
            {"trials", est.trials},
            {"seed", seed},
            {"rng", retain::kRngAlgorithm},
            {"probability", est.probability},
            {"standard_error", est.standard_error}};
    *out_json = dup_string(j.dump());
  });
}

retain_status retain_debrief(const retain_library* library, const char* log_jsonl, int structured,
                             char** out) {
  return guard([&] {
    require(library, "library");
    require(log_jsonl, "log");
    require(out, "out");
    retain::SessionLog log = retain::log_from_jsonl(log_jsonl);
    const retain::Scenario& s = scenario_in(library, log.header.scenario_id.c_str());
    retain::DebriefReport report = retain::debrief_report(log, s);
    *out = dup_string(structured != 0 ? retain::render_debrief_json(report)
                                      : retain::render_debrief_text(report));
  });
}

retain_status retain_server_create(const char* library_dir, const retain_server_options* options,
                                   retain_server** out) {
  return guard([&] {
    require(library_dir, "library_dir");
    require(out, "out");
    *out = nullptr;
    retain::ServiceOptions service_opts;
    retain::HttpOptions http_opts;
    if (options != nullptr) {
      if (options->log_dir != nullptr) service_opts.log_dir = options->log_dir;
      if (options->ttl_seconds != 0) {
        service_opts.session_ttl = std::chrono::seconds(options->ttl_seconds);
      }
      if (options->host != nullptr) http_opts.host = options->host;
      http_opts.port = options->port;
      if (options->static_dir != nullptr) http_opts.static_dir = options->static_dir;
    }
    auto server = std::make_unique<retain_server>();
    server->service = std::make_unique<retain::SessionService>(retain::load_library(library_dir),
                                                               service_opts);
    server->service->recover();
    server->http = std::make_unique<retain::HttpServer>(*server->service, http_opts);
    server->port = server->http->bind();
    *out = server.release();
  });
}

int retain_server_port(const retain_server* server) {
  return server == nullptr ? -1 : server->port;
}

retain_status retain_server_run(retain_server* server) {
  return guard([&] {
    require(server, "server");
    server->http->serve();
  });
}

void retain_server_stop(retain_server* server) {
  if (server != nullptr && server->http) server->http->stop();
}

void retain_server_free(retain_server* server) { delete server; }

}  // extern "C"
