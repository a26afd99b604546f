#include "retain/service.hpp"

#include "retain/analytics.hpp"
#include "retain/error.hpp"

#include <fstream>
#include <random>

namespace retain {

using ojson = nlohmann::ordered_json;

std::string new_session_id() {
  static thread_local std::random_device device;
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  id.reserve(32);
  for (int word = 0; word < 4; ++word) {
    std::uint32_t bits = device();
    for (int i = 0; i < 8; ++i) {
      id += kHex[bits & 0xF];
      bits >>= 4;
    }
  }
  return id;
}

SessionService::SessionService(ScenarioLibrary library, ServiceOptions options,
                               std::function<Clock::time_point()> now)
  : library_(std::move(library)), options_(std::move(options)), now_(std::move(now)) {
  std::filesystem::create_directories(options_.log_dir);
}

std::filesystem::path SessionService::log_path(const std::string& id) const {
  return options_.log_dir / (id + ".jsonl");
}

std::size_t SessionService::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorKind::NotFound, "no session '" + id + "'");
  return it->second;
}

void SessionService::append_line(const Entry& entry, const std::string& line) const {
  std::ofstream out(log_path(entry.id), std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorKind::Io, log_path(entry.id).string() + ": cannot append");
  out << line << '\n';
  out.flush();
}

ojson SessionService::list_scenarios() const {
  ojson list = ojson::array();
  for (const auto& s : library_.scenarios) list.push_back(scenario_summary_json(s));
  return ojson{{"scenarios", std::move(list)}};
}

ojson SessionService::create_session(const std::string& scenario_id, const SessionConfig& config) {
  const Scenario* scenario = library_.find(scenario_id);
  if (scenario == nullptr) throw Error(ErrorKind::NotFound, "no scenario '" + scenario_id + "'");

  auto entry = std::make_shared<Entry>();
  entry->scenario = scenario;
  entry->state = start_session(*scenario, config);
  entry->last_active = now_();
  {
    std::unique_lock lock(sessions_mutex_);
    do {
      entry->id = new_session_id();
    } while (sessions_.count(entry->id) != 0);
    entry->state.log.header.session_id = entry->id;
    write_log_file(log_path(entry->id), entry->state.log);
    sessions_.emplace(entry->id, entry);
  }
  return ojson{{"session", entry->id}, {"view", session_view_json(*scenario, entry->state)}};
}

ojson SessionService::get_session(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return ojson{{"session", id}, {"view", session_view_json(*entry->scenario, entry->state)}};
}

ojson SessionService::submit_action(const std::string& id, const ActionInstance& action,
                                   std::optional<int> expected_step) {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  if (expected_step && !entry->state.ended() && *expected_step != entry->state.step_index) {
    throw Error(ErrorKind::Conflict, "decision for step " + std::to_string(*expected_step) +
                                         " is stale; session '" + id + "' is at step " +
                                         std::to_string(entry->state.step_index));
  }
  FeedbackEvent event = apply_action(*entry->scenario, entry->state, action);
  entry->last_active = now_();
  append_line(*entry, log_record_line(entry->state.log.records.back()));
  entry->changed.notify_all();
  return ojson{{"feedback", feedback_json(event)},
               {"view", session_view_json(*entry->scenario, entry->state)}};
}

std::string SessionService::get_log(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return log_to_jsonl(entry->state.log);
}

ojson SessionService::get_debrief(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  if (!entry->state.ended()) {
    throw Error(ErrorKind::NotEnded, "session '" + id + "' is still ongoing");
  }
  return ojson::parse(render_debrief_json(debrief_report(entry->state.log, *entry->scenario)));
}

std::string SessionService::get_debrief_text(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  if (!entry->state.ended()) {
    throw Error(ErrorKind::NotEnded, "session '" + id + "' is still ongoing");
  }
  return render_debrief_text(debrief_report(entry->state.log, *entry->scenario));
}

ojson SessionService::wait_records(const std::string& id, std::size_t after,
                                   std::chrono::milliseconds timeout) const {
  auto entry = find(id);
  std::unique_lock lock(entry->mutex);
  entry->changed.wait_for(lock, timeout, [&] {
    return entry->state.log.records.size() > after || entry->state.ended();
  });
  ojson records = ojson::array();
  const auto& all = entry->state.log.records;
  for (std::size_t i = after; i < all.size(); ++i) {
    records.push_back(ojson::parse(log_record_line(all[i])));
  }
  return ojson{{"records", std::move(records)},
               {"next", all.size()},
               {"outcome", outcome_id(entry->state.outcome)}};
}

std::size_t SessionService::expire_idle() {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  const auto now = now_();
  std::size_t expired = 0;
  for (auto& entry : entries) {
    std::lock_guard lock(entry->mutex);
    if (entry->state.ended() || now - entry->last_active < options_.session_ttl) continue;
    abandon_session(entry->state);
    append_line(*entry, log_record_line(entry->state.log.records.back()));
    entry->changed.notify_all();
    ++expired;
  }
  return expired;
}

std::size_t SessionService::recover() {
  std::size_t recovered = 0;
  for (const auto& file : std::filesystem::directory_iterator(options_.log_dir)) {
    if (!file.is_regular_file() || file.path().extension() != ".jsonl") continue;
    const std::string id = file.path().stem().string();
    {
      std::shared_lock lock(sessions_mutex_);
      if (sessions_.count(id) != 0) continue;
    }
    SessionLog log = read_log_file(file.path());
    const Scenario* scenario = library_.find(log.header.scenario_id);
    if (scenario == nullptr) {
      throw Error(ErrorKind::NotFound, file.path().string() + ": scenario '" +
                                           log.header.scenario_id + "' is not in the library");
    }
    auto entry = std::make_shared<Entry>();
    entry->id = id;
    entry->scenario = scenario;
    entry->state = replay(*scenario, log);
    entry->last_active = now_();
    std::unique_lock lock(sessions_mutex_);
    sessions_.emplace(id, std::move(entry));
    ++recovered;
  }
  return recovered;
}

}  // namespace retain
