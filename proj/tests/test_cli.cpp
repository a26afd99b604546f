#include "support/cli.hpp"
#include "support/fixtures.hpp"

#include "retain/analytics.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

using namespace retain;
using namespace retain::testing;
using json = nlohmann::json;

namespace {

const std::string kLibrary = kScenarioDir.string();

std::vector<std::string> play_args(const std::string& scenario, const std::string& log) {
  return {"play", "--library", kLibrary, "--scenario", scenario, "--log", log};
}

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = haystack.find(needle); p != std::string::npos; p = haystack.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

// validate ----------------------------------------------------------------------

TEST(CliValidate, BundledLibraryIsClean) {
  const auto r = run_cli({"validate", kLibrary});
  EXPECT_EQ(r.exit_code, 0) << r.out << r.err;
  EXPECT_EQ(count(r.out, "ok    "), 4u) << r.out;
}

TEST(CliValidate, DanglingTransitionNamesFileAndLine) {
  TempDir dir;
  std::string text = slurp(kScenarioDir / "s1_apneic_newborn.retain");
  const auto pos = text.find("next check_hr");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 13, "next nowhere");
  const auto file = dir.write("broken.retain", text);
  const auto r = run_cli({"validate", file.string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.out.find("FAIL  " + file.string()), std::string::npos) << r.out;
  EXPECT_TRUE(std::regex_search(r.out, std::regex(std::regex_replace(
                  file.string(), std::regex(R"([.^$|()\[\]{}*+?\\])"), R"(\$&)") + R"(:\d+)")))
      << r.out;
  EXPECT_NE(r.out.find("dangling transition"), std::string::npos) << r.out;
}

TEST(CliValidate, MissingFileExitsTwo) {
  const auto r = run_cli({"validate", "/nonexistent/x.retain"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("not found"), std::string::npos) << r.err;
}

TEST(CliValidate, StructuredOutput) {
  const auto r = run_cli({"validate", "--format", "structured", kLibrary});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_EQ(j["files"].size(), 4u);
}

// metrics -----------------------------------------------------------------------

TEST(CliMetrics, TableRows) {
  const auto r = run_cli({"metrics", "--library", kLibrary});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(std::regex_search(r.out, std::regex(R"(\n0\s+tutorial\s+4\s+4\s)")));
  EXPECT_TRUE(std::regex_search(r.out, std::regex(R"(\n1\s+s1_apneic_newborn\s+6\s+5\s)")));
  EXPECT_TRUE(std::regex_search(r.out, std::regex(R"(\n2\s+s2_poor_chest_rise\s+9\s+7\s)")));
  EXPECT_TRUE(std::regex_search(r.out, std::regex(R"(\n3\s+s3_cardiac_compromise\s+13\s+9\s)")));
  EXPECT_NE(r.out.find("vocabulary (9):"), std::string::npos);
}

TEST(CliMetrics, EmptyLibraryPrintsOnlyTheHeader) {
  TempDir dir;
  const auto r = run_cli({"metrics", "--library", dir.path().string()});
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(count(r.out, "\n"), 1u) << r.out;
  EXPECT_EQ(r.out.rfind("tier", 0), 0u);
}

TEST(CliMetrics, StructuredOutputParses) {
  const auto r = run_cli({"metrics", "--library", kLibrary, "--format", "structured"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["rows"].size(), 4u);
}

// play --------------------------------------------------------------------------

TEST(CliPlay, PerfectRunSaves) {
  TempDir dir;
  const auto log = (dir.path() / "run.jsonl").string();
  const std::string keys = play_keystrokes(s1(), {}, perfect_actions(s1()));
  const auto r = run_cli(play_args("s1_apneic_newborn", log), keys);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("SAVED with 0 mistakes."), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("Log: " + log), std::string::npos);
  const SessionLog written = read_log_file(log);
  EXPECT_EQ(replay(s1(), written).outcome, Outcome::Saved);
}

TEST(CliPlay, FourMistakesKill) {
  TempDir dir;
  const auto log = (dir.path() / "run.jsonl").string();
  SessionState st = start_session(s1());
  std::vector<ActionInstance> wrong;
  while (!st.ended()) {
    wrong.push_back(some_wrong_action(s1(), st));
    apply_action(s1(), st, wrong.back());
  }
  const auto r = run_cli(play_args("s1_apneic_newborn", log), play_keystrokes(s1(), {}, wrong));
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(count(r.out, "[alarm]"), 4u) << r.out;
  EXPECT_NE(r.out.find("DIED after 4 mistakes."), std::string::npos) << r.out;
  EXPECT_TRUE(equivalent_logs(read_log_file(log), st.log));
}

TEST(CliPlay, InvalidInputReprompts) {
  TempDir dir;
  const auto log = (dir.path() / "run.jsonl").string();
  const std::string keys = "abc\n99\n" + play_keystrokes(s1(), {}, perfect_actions(s1()));
  const auto r = run_cli(play_args("s1_apneic_newborn", log), keys);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(count(r.out, "Invalid choice: enter a number from 1 to"), 2u) << r.out;
  EXPECT_NE(r.out.find("SAVED with 0 mistakes."), std::string::npos);
  EXPECT_EQ(read_log_file(log).records.size(), 6u);
}

TEST(CliPlay, EndOfInputAbandons) {
  TempDir dir;
  const auto log = (dir.path() / "run.jsonl").string();
  const auto r = run_cli(play_args("tutorial", log), "");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("ABANDONED"), std::string::npos) << r.out;
  EXPECT_EQ(read_log_file(log).records.back().event, RecordEvent::Abandoned);
}

TEST(CliPlay, UnknownScenarioExitsTwo) {
  const auto r = run_cli({"play", "--library", kLibrary, "--scenario", "nope"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.err.empty());
}

// simulate / debrief ------------------------------------------------------------

TEST(CliSimulate, DeterministicForASeed) {
  const std::vector<std::string> args = {"simulate", "--library", kLibrary, "--scenario",
                                         "tutorial", "--trials", "5000", "--seed", "11"};
  const auto a = run_cli(args);
  auto with_threads = args;
  with_threads.insert(with_threads.end(), {"--threads", "3"});
  const auto b = run_cli(with_threads);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("trials          5000"), std::string::npos) << a.out;
}

TEST(CliDebrief, PrintsTheMistakeTable) {
  TempDir dir;
  const auto log = (dir.path() / "run.jsonl").string();
  SessionState st = start_session(s1());
  std::vector<ActionInstance> actions = {some_wrong_action(s1(), st)};
  for (const auto& a : perfect_actions(s1())) actions.push_back(a);
  ASSERT_EQ(run_cli(play_args("s1_apneic_newborn", log), play_keystrokes(s1(), {}, actions))
                .exit_code,
            0);
  const auto r = run_cli({"debrief", "--library", kLibrary, log});
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("Outcome: SAVED"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("Mistakes:"), std::string::npos);
  EXPECT_NE(r.out.find("step 0 at birth"), std::string::npos) << r.out;

  const auto structured = run_cli({"debrief", "--library", kLibrary, "--format", "structured", log});
  EXPECT_EQ(json::parse(structured.out)["mistakes"].size(), 1u);
  EXPECT_EQ(run_cli({"debrief", "--library", kLibrary, "/nonexistent.jsonl"}).exit_code, 2);
}

// serve -------------------------------------------------------------------------

TEST(CliServe, AnswersAndStopsOnSignal) {
  TempDir dir;
  ServeProcess serve({"--library", kLibrary, "--log-dir", (dir.path() / "logs").string()});
  httplib::Client client("127.0.0.1", serve.port());
  auto res = client.Get("/api/v1/scenarios");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["scenarios"].size(), 4u);
  EXPECT_TRUE(serve.stop());
}
