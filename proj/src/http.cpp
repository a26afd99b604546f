#include "retain/error.hpp"
#include "retain/service.hpp"

#include <httplib.h>

#include <algorithm>

namespace retain {

using ojson = nlohmann::ordered_json;

namespace {

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::SessionEnded:
    case ErrorKind::NotEnded:
    case ErrorKind::Conflict: return 409;
    case ErrorKind::UnknownAction: return 422;
    case ErrorKind::InvalidArgument:
    case ErrorKind::Parse: return 400;
    default: return 500;
  }
}

void send_json(httplib::Response& res, const ojson& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
  send_json(res,
            ojson{{"error", {{"kind", error_kind_name(kind)}, {"message", message}}}},
            status_for(kind));
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

// Runs a handler, mapping core errors to the JSON error envelope.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e.kind(), e.what());
    } catch (const std::exception& e) {
      send_error(res, ErrorKind::Io, e.what());
    }
  };
}

}  // namespace

HttpServer::HttpServer(SessionService& service, HttpOptions options)
  : service_(service), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::routes() {
  auto& srv = *server_;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  srv.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });

  srv.Get("/api/v1/scenarios", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, service_.list_scenarios());
          }));

  srv.Post("/api/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             if (!body.contains("scenario") || !body["scenario"].is_string()) {
               throw Error(ErrorKind::InvalidArgument, "body needs a string 'scenario'");
             }
             SessionConfig config =
                 config_from_json(body.contains("config") ? body["config"] : nlohmann::json());
             send_json(res, service_.create_session(body["scenario"].get<std::string>(), config),
                       201);
           }));

  srv.Get(R"(/api/v1/sessions/([0-9a-zA-Z_-]+))",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, service_.get_session(req.matches[1]));
          }));

  srv.Post(R"(/api/v1/sessions/([0-9a-zA-Z_-]+)/actions)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             const ActionInstance action = action_from_json(body);
             std::optional<int> expected_step;
             if (body.contains("step") && !body["step"].is_null()) {
               if (!body["step"].is_number_integer()) {
                 throw Error(ErrorKind::InvalidArgument, "'step' must be an integer");
               }
               expected_step = body["step"].get<int>();
             }
             send_json(res, service_.submit_action(req.matches[1], action, expected_step));
           }));

  srv.Get(R"(/api/v1/sessions/([0-9a-zA-Z_-]+)/log)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            res.set_content(service_.get_log(req.matches[1]), "application/x-ndjson");
          }));

  srv.Get(R"(/api/v1/sessions/([0-9a-zA-Z_-]+)/debrief)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            if (req.get_param_value("format") == "text") {
              res.set_content(service_.get_debrief_text(req.matches[1]), "text/plain");
            } else {
              send_json(res, service_.get_debrief(req.matches[1]));
            }
          }));

  // Long-poll channel for feedback events.
  srv.Get(R"(/api/v1/sessions/([0-9a-zA-Z_-]+)/events)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::size_t after = 0;
            long timeout_ms = 25000;
            try {
              if (req.has_param("after")) after = std::stoul(req.get_param_value("after"));
              if (req.has_param("timeout_ms")) {
                timeout_ms = std::clamp(std::stol(req.get_param_value("timeout_ms")), 0L, 60000L);
              }
            } catch (const std::exception&) {
              throw Error(ErrorKind::InvalidArgument, "'after' and 'timeout_ms' must be integers");
            }
            send_json(res, service_.wait_records(req.matches[1], after,
                                                 std::chrono::milliseconds(timeout_ms)));
          }));

  if (options_.static_dir) srv.set_mount_point("/", options_.static_dir->string());
}

int HttpServer::bind() {
  int port = options_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(options_.host);
  } else if (!server_->bind_to_port(options_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(ErrorKind::Io, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  options_.port = port;
  return port;
}

void HttpServer::serve() {
  std::thread sweeper([this] {
    std::unique_lock lock(sweep_mutex_);
    while (!stopping_) {
      sweep_cv_.wait_for(lock, std::chrono::seconds(5));
      if (stopping_) break;
      lock.unlock();
      try {
        service_.expire_idle();
      } catch (const std::exception&) {
        // Log persistence failures surface on the next request instead.
      }
      lock.lock();
    }
  });
  server_->listen_after_bind();
  {
    std::lock_guard lock(sweep_mutex_);
    stopping_ = true;
  }
  sweep_cv_.notify_all();
  sweeper.join();
}

void HttpServer::stop() {
  {
    std::lock_guard lock(sweep_mutex_);
    stopping_ = true;
  }
  sweep_cv_.notify_all();
  if (server_) server_->stop();
}

}  // namespace retain
