#include "support/fixtures.hpp"
#include "support/generators.hpp"

#include "retain/error.hpp"
#include "retain/guidance.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <set>

using namespace retain;
using namespace retain::testing;

namespace {

// A session positioned at an arbitrary stage (guidance only reads the stage).
SessionState at_stage(const Scenario& s, const std::string& stage) {
  SessionState st = detail::fresh_state(s, {});
  st.stage = stage;
  return st;
}

Scenario compressions_scenario() {
  Scenario s = minimal_scenario();
  s.stages[0].menu = {{ActionKind::Compressions, "3:1", true, {}, {}},
                      {ActionKind::Suction, std::nullopt, false, {}, {}}};
  return s;
}

}  // namespace

// next_cue ----------------------------------------------------------------------

TEST(NextCue, TutorialNamesTheCorrectActionEverywhere) {
  for (const auto& stage : tutorial().stages) {
    const auto cue = next_cue(tutorial(), at_stage(tutorial(), stage.id));
    ASSERT_TRUE(cue.has_value()) << stage.id;
    EXPECT_TRUE(cue->names_correct_action) << stage.id;
    EXPECT_FALSE(cue->text.empty());
  }
}

TEST(NextCue, ScenarioTwoUncuedStageHasNoCue) {
  int uncued = 0;
  for (const auto& stage : s2().stages) {
    if (!stage.cue) {
      EXPECT_FALSE(next_cue(s2(), at_stage(s2(), stage.id)).has_value()) << stage.id;
      ++uncued;
    }
  }
  EXPECT_GE(uncued, 1);
}

TEST(NextCue, ScenarioOnePassesAuthoredHintThrough) {
  const auto cue = next_cue(s1(), start_session(s1()));
  ASSERT_TRUE(cue.has_value());
  EXPECT_EQ(cue->text, s1().stage("birth").cue->text);
}

TEST(NextCue, CompleteModeSynthesizesMissingCues) {
  Scenario s = tutorial();
  s.stages[0].cue.reset();
  const auto cue = next_cue(s, at_stage(s, s.stages[0].id));
  ASSERT_TRUE(cue.has_value());
  EXPECT_TRUE(cue->names_correct_action);
  EXPECT_EQ(cue->text, "Next, warm, dry and stimulate.");

  Scenario c = compressions_scenario();
  c.guidance = GuidanceMode::Complete;
  EXPECT_EQ(next_cue(c, at_stage(c, "only"))->text, "Next, chest compressions at 3:1.");
}

TEST(NextCue, NoneOnceEnded) {
  SessionState st = start_session(tutorial(), {1, false, 0});
  apply_action(tutorial(), st, some_wrong_action(tutorial(), st));
  EXPECT_FALSE(next_cue(tutorial(), st).has_value());
}

TEST(NextCue, EveryDrillScenarioLeavesAStageUncued) {
  for (const auto* s : {&s1(), &s2(), &s3()}) {
    int uncued = 0;
    for (const auto& stage : s->stages) {
      uncued += next_cue(*s, at_stage(*s, stage.id)) ? 0 : 1;
    }
    EXPECT_GE(uncued, 1) << s->id;
  }
}

// mistake_utterance -------------------------------------------------------------

TEST(MistakeUtterance, AuthoredLineVerbatim) {
  const SessionState st = start_session(s1());
  const Stage& birth = s1().stage("birth");
  const MenuEntry* suction = birth.find_entry(ActionKind::Suction);
  ASSERT_NE(suction, nullptr);
  ASSERT_TRUE(suction->mistake_utterance.has_value());
  EXPECT_EQ(mistake_utterance(s1(), st, {ActionKind::Suction, "mouth-then-nose"}),
            *suction->mistake_utterance);
}

TEST(MistakeUtterance, DefaultTemplateForWrongParameter) {
  const Scenario s = compressions_scenario();
  const SessionState st = start_session(s);
  const std::string text = mistake_utterance(s, st, {ActionKind::Compressions, "5:1"});
  EXPECT_EQ(text, "Not chest compressions at 5:1. Check the algorithm.");
  EXPECT_NE(text.find("chest compressions"), std::string::npos);
  EXPECT_EQ(default_mistake_utterance(ActionKind::Suction),
            "Not suction the airway. Check the algorithm.");
}

TEST(MistakeUtterance, CorrectChoiceIsAContractViolation) {
  const Scenario s = compressions_scenario();
  const SessionState st = start_session(s);
  try {
    mistake_utterance(s, st, {ActionKind::Compressions, "3:1"});
    FAIL() << "expected a contract error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Contract);
  }
}

TEST(MistakeUtterance, EngineFeedbackUsesIt) {
  SessionState st = start_session(s1());
  const FeedbackEvent ev = apply_action(s1(), st, {ActionKind::Suction, "nose-then-mouth"});
  EXPECT_EQ(ev.utterance, s1().stage("birth").find_entry(ActionKind::Suction)->mistake_utterance);
}

// traverse_dialogue -------------------------------------------------------------

TEST(Dialogue, EmptyPathIsRoot) {
  const DialogueTree& tree = *tutorial().briefing;
  EXPECT_EQ(traverse_dialogue(tree, {}).id, tree.root);
}

TEST(Dialogue, GrandchildOfTwoLevelTree) {
  DialogueTree tree;
  tree.root = "a";
  tree.nodes = {{"a", Speaker::Doctor, "Hello.", {{"Hi", "b"}}, std::nullopt},
                {"b", Speaker::Trainee, "Hi.", {{"Next", "c"}}, std::nullopt},
                {"c", Speaker::Doctor, "Let's begin.", {}, std::nullopt}};
  const std::vector<std::size_t> path = {0, 0};
  EXPECT_EQ(traverse_dialogue(tree, path).id, "c");
  EXPECT_TRUE(traverse_dialogue(tree, path).terminal());
}

TEST(Dialogue, TutorialBranches) {
  const DialogueTree& tree = *tutorial().briefing;
  const std::vector<std::size_t> ready = {0};
  const std::vector<std::size_t> understood = {1, 0};
  EXPECT_EQ(traverse_dialogue(tree, ready).id, "ready");
  EXPECT_EQ(traverse_dialogue(tree, understood).id, "understood");
}

TEST(Dialogue, OutOfRangeReportsDepth) {
  const DialogueTree& tree = *tutorial().briefing;
  const std::vector<std::size_t> bad_first = {5};
  const std::vector<std::size_t> bad_second = {1, 3};
  try {
    traverse_dialogue(tree, bad_first);
    FAIL();
  } catch (const InvalidChoice& e) {
    EXPECT_EQ(e.depth(), 0u);
  }
  try {
    traverse_dialogue(tree, bad_second);
    FAIL();
  } catch (const InvalidChoice& e) {
    EXPECT_EQ(e.depth(), 1u);
    EXPECT_EQ(e.kind(), ErrorKind::InvalidChoice);
  }
}

TEST(DialogueProperty, PathsVisitEachNodeAtMostOnce) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    const DialogueTree tree = random_dialogue(rng);
    std::function<void(std::vector<std::size_t>&, std::set<std::string>&)> walk =
        [&](std::vector<std::size_t>& path, std::set<std::string>& seen) {
          const DialogueNode& node = traverse_dialogue(tree, path);
          ASSERT_TRUE(seen.insert(node.id).second) << "revisited " << node.id;
          for (std::size_t c = 0; c < node.children.size(); ++c) {
            path.push_back(c);
            walk(path, seen);
            path.pop_back();
          }
          seen.erase(node.id);
        };
    std::vector<std::size_t> path;
    std::set<std::string> seen;
    walk(path, seen);
  }
}
