#pragma once

#include "retain/engine.hpp"
#include "retain/model.hpp"
#include "retain/session.hpp"

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_map>

namespace httplib {
class Server;
}

namespace retain {

// ---------------------------------------------------------------------------
// JSON views shared by the HTTP service and the C API
// ---------------------------------------------------------------------------

nlohmann::ordered_json action_json(const ActionInstance& action);
// Throws Error(InvalidArgument) on malformed input.
ActionInstance action_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_json(const SessionConfig& config);
SessionConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json feedback_json(const FeedbackEvent& event);
nlohmann::ordered_json scenario_summary_json(const Scenario& scenario);
// What a client renders: prompt, vitals, menu with parameter submenus, cue
// and outcome. Never includes correctness.
nlohmann::ordered_json session_view_json(const Scenario& scenario, const SessionState& state);

// ---------------------------------------------------------------------------
// Session service
// ---------------------------------------------------------------------------

struct ServiceOptions {
  std::filesystem::path log_dir = "retain-logs";
  std::chrono::milliseconds session_ttl = std::chrono::minutes(60);
};

// 32 hex characters from 128 random bits.
std::string new_session_id();

class SessionService {
public:
  using Clock = std::chrono::steady_clock;

  SessionService(ScenarioLibrary library, ServiceOptions options,
                 std::function<Clock::time_point()> now = Clock::now);

  const ScenarioLibrary& library() const noexcept { return library_; }

  nlohmann::ordered_json list_scenarios() const;
  // Returns {"session": id, "view": ...}. Throws NotFound.
  nlohmann::ordered_json create_session(const std::string& scenario_id,
                                        const SessionConfig& config = {});
  nlohmann::ordered_json get_session(const std::string& id) const;
  // Returns {"feedback": ..., "view": ...}. Throws NotFound, SessionEnded,
  // UnknownAction. With expected_step set, the action only applies while the
  // session is still at that step (Conflict otherwise), so racing clients
  // cannot spend one decision twice.
  nlohmann::ordered_json submit_action(const std::string& id, const ActionInstance& action,
                                       std::optional<int> expected_step = std::nullopt);
  std::string get_log(const std::string& id) const;
  // Throws NotEnded while the session is ongoing.
  nlohmann::ordered_json get_debrief(const std::string& id) const;
  std::string get_debrief_text(const std::string& id) const;
  // Long poll: waits up to `timeout` for records past `after`.
  nlohmann::ordered_json wait_records(const std::string& id, std::size_t after,
                                      std::chrono::milliseconds timeout) const;

  // Ends sessions idle longer than the TTL as Abandoned. Returns how many.
  std::size_t expire_idle();
  // Re-registers every session whose log is in the log directory.
  std::size_t recover();

  std::filesystem::path log_path(const std::string& id) const;
  std::size_t session_count() const;

private:
  struct Entry {
    std::string id;
    const Scenario* scenario = nullptr;
    SessionState state;
    Clock::time_point last_active;
    mutable std::mutex mutex;
    mutable std::condition_variable changed;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  void append_line(const Entry& entry, const std::string& line) const;

  ScenarioLibrary library_;
  ServiceOptions options_;
  std::function<Clock::time_point()> now_;
  mutable std::shared_mutex sessions_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
};

// ---------------------------------------------------------------------------
// HTTP transport (/api/v1)
// ---------------------------------------------------------------------------

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;
};

class HttpServer {
public:
  HttpServer(SessionService& service, HttpOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and returns the port actually used. Throws Error(Io).
  int bind();
  // Serves until stop(); also runs the idle-session sweeper.
  void serve();
  void stop();

private:
  void routes();

  SessionService& service_;
  HttpOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex sweep_mutex_;
  std::condition_variable sweep_cv_;
  bool stopping_ = false;
};

}  // namespace retain
