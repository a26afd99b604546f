#include "retain/analytics.hpp"
#include "retain/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace retain {

using ojson = nlohmann::ordered_json;

namespace {

ojson action_json(const ActionInstance& a) {
  ojson j;
  j["kind"] = action_kind_id(a.kind);
  j["param"] = a.param ? ojson(*a.param) : ojson(nullptr);
  return j;
}

[[noreturn]] void bad_line(std::size_t line, const std::string& why) {
  throw Error(ErrorKind::Parse, "log line " + std::to_string(line + 1) + ": " + why);
}

}  // namespace

std::string log_header_line(const LogHeader& h) {
  ojson j;
  j["type"] = "header";
  j["format"] = h.format;
  j["scenario"] = h.scenario_id;
  j["config"] = {{"max_mistakes", h.config.max_mistakes},
                 {"timing_enforced", h.config.timing_enforced},
                 {"seed", h.config.seed}};
  j["rng"] = h.rng;
  j["started_at_ms"] = h.started_at_ms;
  j["session_id"] = h.session_id ? ojson(*h.session_id) : ojson(nullptr);
  return j.dump();
}

std::string log_record_line(const LogRecord& r) {
  ojson j;
  j["type"] = r.event == RecordEvent::Action ? "action" : "abandoned";
  j["step"] = r.step;
  j["t"] = r.time;
  j["stage"] = r.stage;
  if (r.event == RecordEvent::Action) {
    j["action"] = r.action ? action_json(*r.action) : ojson(nullptr);
    j["feedback"] = r.feedback ? ojson(feedback_kind_id(*r.feedback)) : ojson(nullptr);
  }
  j["mistakes"] = r.mistakes;
  j["health"] = r.health;
  j["next"] = r.next;
  return j.dump();
}

std::string log_to_jsonl(const SessionLog& log) {
  std::string out = log_header_line(log.header);
  out += '\n';
  for (const auto& r : log.records) {
    out += log_record_line(r);
    out += '\n';
  }
  return out;
}

SessionLog log_from_jsonl(std::string_view text) {
  SessionLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  bool have_header = false;
  for (; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const std::exception& e) {
      bad_line(n, std::string("invalid JSON: ") + e.what());
    }
    try {
      const std::string type = j.at("type").get<std::string>();
      if (!have_header) {
        if (type != "header") bad_line(n, "first line must be the header");
        LogHeader& h = log.header;
        h.format = j.at("format").get<std::string>();
        if (h.format != kLogFormat) bad_line(n, "unsupported log format '" + h.format + "'");
        h.scenario_id = j.at("scenario").get<std::string>();
        const auto& c = j.at("config");
        h.config.max_mistakes = c.at("max_mistakes").get<int>();
        h.config.timing_enforced = c.at("timing_enforced").get<bool>();
        h.config.seed = c.at("seed").get<std::uint64_t>();
        h.rng = j.at("rng").get<std::string>();
        h.started_at_ms = j.at("started_at_ms").get<std::int64_t>();
        if (j.contains("session_id") && !j["session_id"].is_null()) {
          h.session_id = j["session_id"].get<std::string>();
        }
        have_header = true;
        continue;
      }
      LogRecord r;
      if (type == "action") {
        r.event = RecordEvent::Action;
        const auto& a = j.at("action");
        auto kind = parse_action_kind(a.at("kind").get<std::string>());
        if (!kind) bad_line(n, "unknown action kind");
        ActionInstance action{*kind, std::nullopt};
        if (!a.at("param").is_null()) action.param = a["param"].get<std::string>();
        r.action = std::move(action);
        auto fb = parse_feedback_kind(j.at("feedback").get<std::string>());
        if (!fb) bad_line(n, "unknown feedback kind");
        r.feedback = *fb;
      } else if (type == "abandoned") {
        r.event = RecordEvent::Abandoned;
      } else {
        bad_line(n, "unknown record type '" + type + "'");
      }
      r.step = j.at("step").get<int>();
      r.time = j.at("t").get<int>();
      r.stage = j.at("stage").get<std::string>();
      r.mistakes = j.at("mistakes").get<int>();
      r.health = j.at("health").get<int>();
      r.next = j.at("next").get<std::string>();
      if (!log.records.empty() && r.step <= log.records.back().step) {
        bad_line(n, "step indices must increase");
      }
      log.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      bad_line(n, std::string("malformed record: ") + e.what());
    }
  }
  if (!have_header) throw Error(ErrorKind::Parse, "log has no header line");
  return log;
}

void write_log_file(const std::filesystem::path& path, const SessionLog& log) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, path.string() + ": cannot write");
  out << log_to_jsonl(log);
  if (!out) throw Error(ErrorKind::Io, path.string() + ": write failed");
}

SessionLog read_log_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, path.string() + ": not found");
  std::ostringstream buf;
  buf << in.rdbuf();
  return log_from_jsonl(buf.str());
}

}  // namespace retain
