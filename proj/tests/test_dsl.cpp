#include "support/fixtures.hpp"
#include "support/generators.hpp"

#include "retain/dsl.hpp"
#include "retain/error.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace retain;
using namespace retain::testing;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

ParseError parse_error_of(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const ParseException& e) {
    return e.error();
  }
  ADD_FAILURE() << "expected a parse error for:\n" << text;
  return {};
}

// 1-based line and code-point column of byte offset `p`.
std::pair<int, int> position_of(std::string_view text, std::size_t p) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < p; ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == '\n') {
      ++line;
      column = 1;
    } else if ((c & 0xC0) != 0x80) {
      ++column;
    }
  }
  return {line, column};
}

struct TokenSpan {
  std::size_t begin;
  std::size_t end;
};

// A deliberately simple tokenizer used only to find cut points inside tokens.
std::vector<TokenSpan> token_spans(std::string_view s) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  const auto word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (c == '"') {
      const std::size_t b = i++;
      while (i < s.size() && s[i] != '"') i += s[i] == '\\' ? 2 : 1;
      out.push_back({b, ++i});
    } else if (word(c)) {
      const std::size_t b = i;
      while (i < s.size() && word(s[i])) ++i;
      out.push_back({b, i});
    } else if (i + 1 < s.size() && (s.substr(i, 2) == "->" || s.substr(i, 2) == "<=" ||
                                    s.substr(i, 2) == ">=" || s.substr(i, 2) == "==" ||
                                    s.substr(i, 2) == "!=")) {
      out.push_back({i, i + 2});
      i += 2;
    } else {
      out.push_back({i, i + 1});
      ++i;
    }
  }
  return out;
}

}  // namespace

// Parsing ------------------------------------------------------------------

TEST(Parse, MinimalOneStageSource) {
  const Scenario s = parse_scenario(kMinimalSource);
  EXPECT_EQ(s.id, "mini");
  ASSERT_EQ(s.stages.size(), 1u);
  EXPECT_EQ(s.stages[0].menu.size(), 2u);
  EXPECT_EQ(s.guidance, GuidanceMode::Partial);
  EXPECT_EQ(s.title, "");
  EXPECT_TRUE(validate_scenario(s).ok());
}

TEST(Parse, BundledScenarioTwoFile) {
  const Scenario s = parse_scenario(read_file(kScenarioDir / "s2_poor_chest_rise.retain"));
  EXPECT_EQ(compute_metrics(s), (ScenarioMetrics{9, 7}));
}

TEST(Parse, UnknownActionKindNamesTheToken) {
  std::string src(kMinimalSource);
  src.replace(src.find("entry suction"), 13, "entry defibrillate");
  const ParseError e = parse_error_of(src);
  EXPECT_NE(e.message.find("defibrillate"), std::string::npos) << e.message;
  EXPECT_EQ(e.line, 9);
  EXPECT_EQ(e.column, 11);
}

TEST(Parse, FormatVersionIsOptionalButChecked) {
  EXPECT_NO_THROW(parse_scenario("format_version 1;\n" + std::string(kMinimalSource)));
  const ParseError e = parse_error_of("format_version 2;\n" + std::string(kMinimalSource));
  EXPECT_EQ(e.line, 1);
  EXPECT_NE(e.message.find("2"), std::string::npos);
}

TEST(Parse, CommentsAndWhitespaceAreIgnored) {
  const std::string src = "# leading comment\n\n" + std::string(kMinimalSource) + "# trailing\n";
  EXPECT_EQ(parse_scenario(src), parse_scenario(kMinimalSource));
}

TEST(Parse, GuardsAndOptionalFields) {
  const Scenario s = parse_scenario(R"(scenario g {
  title "Guards";
  tier 2;
  guidance partial;
  initial a;
  metrics 2 2;
  stage a {
    prompt "A";
    vitals heart_rate=50 breathing=gasping tone=some_flexion;
    time_budget 3;
    cue "Think." audio="hint.ogg";
    entry compressions param="3:1" correct "Three to one.";
    entry suction wrong;
    next b if heart_rate < 60 and breathing != regular and health >= 2;
    next SAVE;
  }
  stage b {
    prompt "B";
    vitals heart_rate=120 breathing=regular tone=active;
    cue "Done?" names-correct;
    entry assess_hr correct;
    next SAVE;
  }
})");
  const Stage& a = s.stage("a");
  EXPECT_EQ(a.time_budget, 3);
  ASSERT_TRUE(a.cue.has_value());
  EXPECT_EQ(a.cue->audio, "hint.ogg");
  EXPECT_FALSE(a.cue->names_correct_action);
  EXPECT_EQ(a.menu[0].param, "3:1");
  EXPECT_EQ(a.menu[0].mistake_utterance, "Three to one.");
  ASSERT_EQ(a.transitions.size(), 2u);
  ASSERT_EQ(a.transitions[0].guard.size(), 3u);
  EXPECT_EQ(a.transitions[0].guard[1],
            (Condition{VitalField::Breathing, Comparison::NotEqual,
                       static_cast<int>(Breathing::Regular)}));
  EXPECT_TRUE(s.stage("b").cue->names_correct_action);
  // Both stages are cued, which partial guidance does not allow.
  const auto report = validate_scenario(s);
  ASSERT_EQ(report.violations.size(), 1u) << report.summary();
  EXPECT_TRUE(report.has(ViolationCode::PartialGuidanceFullyCued));
}

TEST(Parse, EnumFieldsOnlyCompareForEquality) {
  std::string src(kMinimalSource);
  src.replace(src.find("next SAVE;"), 10, "next SAVE if tone < active;\n    next SAVE;");
  const ParseError e = parse_error_of(src);
  EXPECT_EQ(e.line, 10);
}

TEST(Parse, DuplicateStageIdIsAnError) {
  std::string src(kMinimalSource);
  const std::size_t at = src.find("  stage only");
  const std::size_t end = src.rfind("}\n");
  src.insert(end, src.substr(at, end - at));
  const ParseError e = parse_error_of(src);
  EXPECT_NE(e.message.find("only"), std::string::npos) << e.message;
}

TEST(Parse, ColumnsCountCodePoints) {
  const ParseError e =
      parse_error_of("scenario x {\n  title \"\xC3\xA4\xC3\xA4\xC3\xA4\"; bogus 1;\n}\n");
  EXPECT_EQ(e.line, 2);
  EXPECT_EQ(e.column, 16);
}

TEST(Parse, UnterminatedStringReportsTheEndOfInput) {
  const std::string src = "scenario x {\n  title \"abc";
  const ParseError e = parse_error_of(src);
  const auto [line, column] = position_of(src, src.size());
  EXPECT_EQ(e.line, line);
  EXPECT_EQ(e.column, column);
}

TEST(Parse, IsPure) {
  const std::string text = read_file(kScenarioDir / "s3_cardiac_compromise.retain");
  EXPECT_EQ(parse_scenario(text), parse_scenario(text));
}

TEST(ParseProperty, TruncationMidTokenFailsAtTheCut) {
  for (const char* file : {"tutorial.retain", "s1_apneic_newborn.retain",
                           "s3_cardiac_compromise.retain"}) {
    const std::string text = read_file(kScenarioDir / file);
    int cuts = 0;
    for (const auto& tok : token_spans(text)) {
      for (std::size_t p = tok.begin + 1; p < tok.end; ++p) {
        if ((static_cast<unsigned char>(text[p]) & 0xC0) == 0x80) continue;  // inside a code point
        const std::string prefix = text.substr(0, p);
        try {
          parse_scenario(prefix);
          ADD_FAILURE() << file << ": prefix of " << p << " bytes parsed";
        } catch (const ParseException& e) {
          const auto [line, column] = position_of(prefix, prefix.size());
          EXPECT_EQ(e.error().line, line) << file << " cut at " << p << ": " << e.what();
          EXPECT_EQ(e.error().column, column) << file << " cut at " << p << ": " << e.what();
        }
        ++cuts;
      }
    }
    EXPECT_GT(cuts, 500) << file;
  }
}

TEST(ParseProperty, EveryProperPrefixFails) {
  const std::string text = read_file(kScenarioDir / "s1_apneic_newborn.retain");
  const std::size_t last_brace = text.rfind('}');
  for (std::size_t p = 0; p <= last_brace; ++p) {
    EXPECT_THROW(parse_scenario(text.substr(0, p)), ParseException) << p;
  }
}

// Serialization --------------------------------------------------------------

TEST(Serialize, OneStageRoundTrip) {
  const Scenario s = minimal_scenario();
  EXPECT_EQ(parse_scenario(serialize_scenario(s)), s);
}

TEST(Serialize, BundledScenariosAreByteStable) {
  for (const auto& s : bundled().scenarios) {
    const std::string once = serialize_scenario(s);
    const std::string twice = serialize_scenario(parse_scenario(once));
    EXPECT_EQ(once, twice) << s.id;
    EXPECT_EQ(once, serialize_scenario(s)) << s.id;
    EXPECT_EQ(parse_scenario(once), s) << s.id;
  }
}

TEST(Serialize, CanonicalFormStartsWithVersion) {
  const std::string text = serialize_scenario(minimal_scenario());
  EXPECT_EQ(text.rfind("format_version 1;\n", 0), 0u) << text;
  EXPECT_EQ(text.find('\t'), std::string::npos);
}

TEST(Serialize, EveryKindAppearsExactlyWhereUsed) {
  const Scenario& s = s3();
  const std::string text = serialize_scenario(s);
  for (auto kind : kAllActionKinds) {
    int used = 0;
    for (const auto& st : s.stages) {
      for (const auto& e : st.menu) used += e.kind == kind ? 1 : 0;
    }
    const std::string needle = "entry " + std::string(action_kind_id(kind)) + " ";
    int found = 0;
    for (std::size_t at = text.find(needle); at != std::string::npos;
         at = text.find(needle, at + 1)) {
      ++found;
    }
    EXPECT_EQ(found, used) << action_kind_id(kind);
    EXPECT_GT(used, 0) << action_kind_id(kind);
  }
}

TEST(Serialize, QuotesEscapesAndUnicode) {
  Scenario s = minimal_scenario();
  s.title = "Say \"hi\"\\ then\nnewline\ttab \xE2\x80\x94 \xF0\x9F\x91\xB6";
  const std::string text = serialize_scenario(s);
  EXPECT_EQ(parse_scenario(text).title, s.title);
}

TEST(SerializeProperty, RandomScenariosRoundTrip) {
  std::mt19937_64 rng(0xC0FFEE);
  GenOptions opt;
  for (int i = 0; i < 1000; ++i) {
    const Scenario s = random_scenario(rng, opt, compute_metrics);
    const std::string text = serialize_scenario(s);
    Scenario back;
    try {
      back = parse_scenario(text);
    } catch (const ParseException& e) {
      FAIL() << "case " << i << ": " << e.what() << "\n" << text;
    }
    ASSERT_EQ(back, s) << "case " << i << "\n" << text;
    ASSERT_EQ(serialize_scenario(back), text) << "case " << i;
  }
}

// Library loading ------------------------------------------------------------

TEST(Library, BundledDirectoryHasFourTiers) {
  const ScenarioLibrary& lib = bundled();
  ASSERT_EQ(lib.scenarios.size(), 4u);
  for (int tier = 0; tier < 4; ++tier) EXPECT_EQ(lib.scenarios[tier].difficulty_tier, tier);
  EXPECT_TRUE(lib.warnings.empty());
  EXPECT_EQ(lib.sources.size(), 4u);
}

TEST(Library, EmptyDirectoryWarns) {
  TempDir dir;
  const ScenarioLibrary lib = load_library(dir.path());
  EXPECT_TRUE(lib.empty());
  EXPECT_EQ(lib.warnings.size(), 1u);
}

TEST(Library, DuplicateIdsAreRejected) {
  TempDir dir;
  dir.write("a.retain", kMinimalSource);
  dir.write("b.retain", kMinimalSource);
  try {
    load_library(dir.path());
    FAIL() << "expected LibraryError";
  } catch (const LibraryError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate id"), std::string::npos) << e.what();
  }
}

TEST(Library, DiagnosticsNameFileAndLine) {
  TempDir dir;
  std::string bad(kMinimalSource);
  bad.replace(bad.find("next SAVE"), 9, "next nowhere");
  const auto path = dir.write("bad.retain", bad);
  std::string good(kMinimalSource);
  good.replace(good.find("mini"), 4, "good");
  dir.write("good.retain", good);
  try {
    load_library(dir.path());
    FAIL() << "expected LibraryError";
  } catch (const LibraryError& e) {
    ASSERT_EQ(e.diagnostics().size(), 1u);
    EXPECT_EQ(e.diagnostics()[0].rfind(path.string() + ":10:", 0), 0u) << e.diagnostics()[0];
    EXPECT_NE(e.diagnostics()[0].find("dangling transition"), std::string::npos);
  }
}

TEST(Library, SyntaxErrorsCarryColumns) {
  TempDir dir;
  const auto path = dir.write("broken.retain", "scenario x {\n  tier one;\n}\n");
  try {
    load_scenario_file(path);
    FAIL() << "expected LibraryError";
  } catch (const LibraryError& e) {
    EXPECT_EQ(e.diagnostics().at(0).rfind(path.string() + ":2:8:", 0), 0u)
        << e.diagnostics()[0];
  }
}

TEST(Library, MissingPaths) {
  try {
    load_scenario_file("/nonexistent/x.retain");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotFound);
  }
  try {
    load_library("/nonexistent-dir");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotFound);
  }
}
