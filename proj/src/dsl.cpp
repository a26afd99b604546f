#include "retain/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace retain {

std::string ParseError::to_string() const {
  std::string out = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  if (expected) out += " (expected " + *expected + ")";
  return out;
}

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += "\n";
    out += l;
  }
  return out;
}

}  // namespace

LibraryError::LibraryError(std::vector<std::string> diagnostics)
  : Error(ErrorKind::Library, join_lines(diagnostics)), diagnostics_(std::move(diagnostics)) {}

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok { Ident, String, Int, LBrace, RBrace, Semi, Equals, Arrow, Op, End };

struct Token {
  Tok type = Tok::End;
  std::string text;  // identifier, decoded string, digits, or operator symbol
  std::size_t begin = 0;
  std::size_t end = 0;
  int line = 1;
  int column = 1;
};

std::string_view tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::String: return "string";
    case Tok::Int: return "integer";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Semi: return "';'";
    case Tok::Equals: return "'='";
    case Tok::Arrow: return "'->'";
    case Tok::Op: return "comparison";
    case Tok::End: return "end of input";
  }
  return "token";
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_trivia();
    Token t;
    t.begin = pos_;
    t.line = line_;
    t.column = column_;
    if (pos_ >= src_.size()) {
      t.type = Tok::End;
      t.end = pos_;
      return t;
    }
    char c = src_[pos_];
    if (ident_start(c)) {
      // '-' may join words ("names-correct") but never starts "->".
      while (pos_ < src_.size()) {
        char d = src_[pos_];
        if (ident_char(d)) {
          advance();
        } else if (d == '-' && pos_ + 1 < src_.size() && ident_char(src_[pos_ + 1])) {
          advance();
        } else {
          break;
        }
      }
      t.type = Tok::Ident;
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      t.type = Tok::Int;
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
      if (t.text.size() > 9) fail(t, "integer literal too large");
    } else if (c == '"') {
      lex_string(t);
    } else if (c == '{' || c == '}' || c == ';') {
      advance();
      t.type = c == '{' ? Tok::LBrace : c == '}' ? Tok::RBrace : Tok::Semi;
      t.text = std::string(1, c);
    } else if (c == '-') {
      advance();
      if (pos_ < src_.size() && src_[pos_] == '>') {
        advance();
        t.type = Tok::Arrow;
        t.text = "->";
      } else {
        t.end = pos_;
        fail(t, "stray '-'", "'->'");
      }
    } else if (c == '<' || c == '>' || c == '=' || c == '!') {
      advance();
      bool eq = pos_ < src_.size() && src_[pos_] == '=';
      if (eq) advance();
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
      if (t.text == "=") {
        t.type = Tok::Equals;
      } else if (t.text == "!") {
        t.end = pos_;
        fail(t, "stray '!'", "'!='");
      } else {
        t.type = Tok::Op;
      }
    } else {
      advance();
      t.end = pos_;
      fail(t, "unexpected character '" + std::string(1, c) + "'");
    }
    t.end = pos_;
    return t;
  }

  // Position just past the last byte of input.
  std::pair<int, int> end_position() {
    std::size_t save_pos = pos_;
    int save_line = line_, save_col = column_;
    while (pos_ < src_.size()) advance();
    std::pair<int, int> at{line_, column_};
    pos_ = save_pos;
    line_ = save_line;
    column_ = save_col;
    return at;
  }

  std::size_t size() const { return src_.size(); }

  [[noreturn]] void fail(const Token& at, std::string message,
                         std::optional<std::string> expected = std::nullopt) {
    ParseError e;
    // A token that runs into the end of input may simply be cut short, so
    // the error belongs at the truncation point.
    if (at.end >= src_.size() || at.type == Tok::End) {
      auto [line, col] = end_position();
      e.line = line;
      e.column = col;
      if (at.type != Tok::End) message = "unexpected end of input after " + message;
    } else {
      e.line = at.line;
      e.column = at.column;
    }
    e.message = std::move(message);
    e.expected = std::move(expected);
    throw ParseException(std::move(e));
  }

private:
  void advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++column_;
    } else {
      // continuation byte: the lead byte already counted this code point
    }
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void lex_string(Token& t) {
    advance();  // opening quote
    std::string value;
    for (;;) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') {
        t.end = pos_;
        fail(t, "unterminated string", "'\"'");
      }
      char c = src_[pos_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) {
          t.end = pos_;
          fail(t, "unterminated string", "'\"'");
        }
        char e = src_[pos_];
        advance();
        switch (e) {
          case '"': value += '"'; break;
          case '\\': value += '\\'; break;
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          default:
            t.end = pos_;
            fail(t, std::string("unknown escape '\\") + e + "'");
        }
        continue;
      }
      value += c;
      advance();
    }
    t.type = Tok::String;
    t.text = std::move(value);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) { bump(); }

  Scenario parse_file() {
    if (is_keyword("format_version")) {
      bump();
      Token v = expect(Tok::Int, "format version");
      if (std::stoi(v.text) != kFormatVersion) {
        lex_.fail(v, "unsupported format_version " + v.text,
                  "format_version " + std::to_string(kFormatVersion));
      }
      expect(Tok::Semi, "';'");
    }
    Scenario s = parse_scenario();
    if (cur_.type != Tok::End) lex_.fail(cur_, "trailing content after scenario", "end of input");
    return s;
  }

private:
  void bump() { cur_ = lex_.next(); }

  bool is_keyword(std::string_view kw) const { return cur_.type == Tok::Ident && cur_.text == kw; }

  Token expect(Tok type, std::string_view what) {
    if (cur_.type != type) {
      lex_.fail(cur_, "unexpected " + describe(cur_), std::string(what));
    }
    Token t = cur_;
    bump();
    return t;
  }

  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw)) lex_.fail(cur_, "unexpected " + describe(cur_), "'" + std::string(kw) + "'");
    bump();
  }

  static std::string describe(const Token& t) {
    switch (t.type) {
      case Tok::Ident: return "'" + t.text + "'";
      case Tok::String: return "string \"" + t.text + "\"";
      case Tok::Int: return "integer " + t.text;
      case Tok::Op: return "'" + t.text + "'";
      default: return std::string(tok_name(t.type));
    }
  }

  int expect_int(std::string_view what) { return std::stoi(expect(Tok::Int, what).text); }

  Scenario parse_scenario() {
    expect_keyword("scenario");
    Scenario s;
    s.id = expect(Tok::Ident, "scenario id").text;
    Token open = expect(Tok::LBrace, "'{'");

    bool have_title = false, have_tier = false, have_guidance = false, have_initial = false,
         have_metrics = false;
    std::unordered_set<std::string> stage_ids;
    const auto once = [&](bool& flag, const Token& at) {
      if (flag) lex_.fail(at, "duplicate '" + at.text + "'");
      flag = true;
    };

    while (cur_.type != Tok::RBrace) {
      Token kw = expect(Tok::Ident, "scenario item");
      if (kw.text == "title") {
        once(have_title, kw);
        s.title = expect(Tok::String, "title string").text;
        expect(Tok::Semi, "';'");
      } else if (kw.text == "tier") {
        once(have_tier, kw);
        s.difficulty_tier = expect_int("tier number");
        expect(Tok::Semi, "';'");
      } else if (kw.text == "guidance") {
        once(have_guidance, kw);
        Token m = expect(Tok::Ident, "'complete' or 'partial'");
        if (m.text == "complete") {
          s.guidance = GuidanceMode::Complete;
        } else if (m.text == "partial") {
          s.guidance = GuidanceMode::Partial;
        } else {
          lex_.fail(m, "unknown guidance mode '" + m.text + "'", "'complete' or 'partial'");
        }
        expect(Tok::Semi, "';'");
      } else if (kw.text == "initial") {
        once(have_initial, kw);
        s.initial_stage = expect(Tok::Ident, "stage id").text;
        expect(Tok::Semi, "';'");
      } else if (kw.text == "metrics") {
        once(have_metrics, kw);
        s.declared_metrics.optimal_path_length = expect_int("optimal path length");
        s.declared_metrics.distinct_actions = expect_int("distinct action count");
        expect(Tok::Semi, "';'");
      } else if (kw.text == "dialogue") {
        if (s.briefing) lex_.fail(kw, "duplicate 'dialogue'");
        s.briefing = parse_dialogue();
      } else if (kw.text == "stage") {
        Stage st = parse_stage(kw);
        if (!stage_ids.insert(st.id).second) {
          lex_.fail(stage_name_, "duplicate stage id '" + st.id + "'");
        }
        s.stages.push_back(std::move(st));
      } else {
        lex_.fail(kw, "unknown scenario item '" + kw.text + "'",
                  "title, tier, guidance, initial, metrics, dialogue or stage");
      }
    }
    Token close = cur_;
    bump();
    (void)open;
    if (!have_tier) lex_.fail(close, "scenario '" + s.id + "' is missing 'tier'");
    if (!have_initial) lex_.fail(close, "scenario '" + s.id + "' is missing 'initial'");
    if (!have_metrics) lex_.fail(close, "scenario '" + s.id + "' is missing 'metrics'");
    return s;
  }

  DialogueTree parse_dialogue() {
    DialogueTree tree;
    tree.root = expect(Tok::Ident, "dialogue root id").text;
    expect(Tok::LBrace, "'{'");
    std::unordered_set<std::string> ids;
    while (cur_.type != Tok::RBrace) {
      expect_keyword("say");
      Token id = expect(Tok::Ident, "dialogue node id");
      if (!ids.insert(id.text).second) lex_.fail(id, "duplicate dialogue node '" + id.text + "'");
      DialogueNode node;
      node.id = id.text;
      Token who = expect(Tok::Ident, "'doctor' or 'trainee'");
      auto speaker = parse_speaker(who.text);
      if (!speaker) lex_.fail(who, "unknown speaker '" + who.text + "'", "'doctor' or 'trainee'");
      node.speaker = *speaker;
      node.text = expect(Tok::String, "utterance").text;
      if (is_keyword("audio")) node.audio = parse_audio();
      if (cur_.type == Tok::LBrace) {
        bump();
        while (cur_.type != Tok::RBrace) {
          expect_keyword("option");
          DialogueChoice c;
          c.label = expect(Tok::String, "option label").text;
          expect(Tok::Arrow, "'->'");
          c.target = expect(Tok::Ident, "dialogue node id").text;
          expect(Tok::Semi, "';'");
          node.children.push_back(std::move(c));
        }
        bump();
      } else {
        expect(Tok::Semi, "';' or '{'");
      }
      tree.nodes.push_back(std::move(node));
    }
    bump();
    return tree;
  }

  std::string parse_audio() {
    bump();  // 'audio'
    expect(Tok::Equals, "'='");
    return expect(Tok::String, "audio asset id").text;
  }

  Stage parse_stage(const Token& kw) {
    Stage st;
    st.line.value = kw.line;
    stage_name_ = expect(Tok::Ident, "stage id");
    st.id = stage_name_.text;
    if (st.id == kSaveTarget) lex_.fail(stage_name_, "'SAVE' is reserved and cannot name a stage");
    expect(Tok::LBrace, "'{'");
    bool have_prompt = false, have_vitals = false, have_cue = false, have_budget = false;
    while (cur_.type != Tok::RBrace) {
      Token item = expect(Tok::Ident, "stage item");
      const auto once = [&](bool& flag) {
        if (flag) lex_.fail(item, "duplicate '" + item.text + "' in stage '" + st.id + "'");
        flag = true;
      };
      if (item.text == "prompt") {
        once(have_prompt);
        st.prompt = expect(Tok::String, "prompt text").text;
        expect(Tok::Semi, "';'");
      } else if (item.text == "vitals") {
        once(have_vitals);
        parse_vitals(st.vitals);
      } else if (item.text == "time_budget") {
        once(have_budget);
        st.time_budget = expect_int("time budget");
        expect(Tok::Semi, "';'");
      } else if (item.text == "cue") {
        once(have_cue);
        GuidanceCue cue;
        cue.text = expect(Tok::String, "cue text").text;
        if (is_keyword("names-correct")) {
          cue.names_correct_action = true;
          bump();
        }
        if (is_keyword("audio")) cue.audio = parse_audio();
        expect(Tok::Semi, "';'");
        st.cue = std::move(cue);
      } else if (item.text == "entry") {
        st.menu.push_back(parse_entry(item));
      } else if (item.text == "next") {
        st.transitions.push_back(parse_next(item));
      } else {
        lex_.fail(item, "unknown stage item '" + item.text + "'",
                  "prompt, vitals, time_budget, cue, entry or next");
      }
    }
    bump();
    return st;
  }

  void parse_vitals(InfantVitals& v) {
    bool hr = false, br = false, tn = false;
    while (cur_.type == Tok::Ident) {
      Token field = cur_;
      bump();
      expect(Tok::Equals, "'='");
      if (field.text == "heart_rate") {
        if (hr) lex_.fail(field, "duplicate 'heart_rate'");
        hr = true;
        v.heart_rate = expect_int("heart rate");
      } else if (field.text == "breathing") {
        if (br) lex_.fail(field, "duplicate 'breathing'");
        br = true;
        Token val = expect(Tok::Ident, "breathing state");
        auto b = parse_breathing(val.text);
        if (!b) lex_.fail(val, "unknown breathing state '" + val.text + "'",
                          "apneic, gasping, labored or regular");
        v.breathing = *b;
      } else if (field.text == "tone") {
        if (tn) lex_.fail(field, "duplicate 'tone'");
        tn = true;
        Token val = expect(Tok::Ident, "tone");
        auto t = parse_tone(val.text);
        if (!t) lex_.fail(val, "unknown tone '" + val.text + "'", "floppy, some_flexion or active");
        v.tone = *t;
      } else {
        lex_.fail(field, "unknown vitals field '" + field.text + "'",
                  "heart_rate, breathing or tone");
      }
    }
    expect(Tok::Semi, "';'");
  }

  MenuEntry parse_entry(const Token& kw) {
    MenuEntry e;
    e.line.value = kw.line;
    Token kind = expect(Tok::Ident, "action kind");
    auto k = parse_action_kind(kind.text);
    if (!k) lex_.fail(kind, "unknown action kind '" + kind.text + "'", "one of the 9 action kinds");
    e.kind = *k;
    if (is_keyword("param")) {
      bump();
      expect(Tok::Equals, "'='");
      e.param = expect(Tok::String, "parameter value").text;
    }
    Token verdict = expect(Tok::Ident, "'correct' or 'wrong'");
    if (verdict.text == "correct") {
      e.correct = true;
    } else if (verdict.text != "wrong") {
      lex_.fail(verdict, "unexpected '" + verdict.text + "'", "'correct' or 'wrong'");
    }
    if (cur_.type == Tok::String) {
      e.mistake_utterance = cur_.text;
      bump();
    }
    expect(Tok::Semi, "';'");
    return e;
  }

  Transition parse_next(const Token& kw) {
    Transition t;
    t.line.value = kw.line;
    t.target = expect(Tok::Ident, "stage id or SAVE").text;
    if (is_keyword("if")) {
      bump();
      t.guard.push_back(parse_condition());
      while (is_keyword("and")) {
        bump();
        t.guard.push_back(parse_condition());
      }
    }
    expect(Tok::Semi, "';'");
    return t;
  }

  Condition parse_condition() {
    Condition c;
    Token field = expect(Tok::Ident, "vitals field");
    if (field.text == "heart_rate") {
      c.field = VitalField::HeartRate;
    } else if (field.text == "breathing") {
      c.field = VitalField::Breathing;
    } else if (field.text == "tone") {
      c.field = VitalField::Tone;
    } else if (field.text == "health") {
      c.field = VitalField::Health;
    } else {
      lex_.fail(field, "unknown vitals field '" + field.text + "'",
                "heart_rate, breathing, tone or health");
    }
    Token op = expect(Tok::Op, "comparison operator");
    if (op.text == "<") c.op = Comparison::Less;
    else if (op.text == "<=") c.op = Comparison::LessEqual;
    else if (op.text == ">") c.op = Comparison::Greater;
    else if (op.text == ">=") c.op = Comparison::GreaterEqual;
    else if (op.text == "==") c.op = Comparison::Equal;
    else c.op = Comparison::NotEqual;

    const bool enum_field = c.field == VitalField::Breathing || c.field == VitalField::Tone;
    if (enum_field) {
      if (c.op != Comparison::Equal && c.op != Comparison::NotEqual) {
        lex_.fail(op, "'" + field.text + "' only supports == and !=", "'==' or '!='");
      }
      Token val = expect(Tok::Ident, "state name");
      if (c.field == VitalField::Breathing) {
        auto b = parse_breathing(val.text);
        if (!b) lex_.fail(val, "unknown breathing state '" + val.text + "'");
        c.value = static_cast<int>(*b);
      } else {
        auto t = parse_tone(val.text);
        if (!t) lex_.fail(val, "unknown tone '" + val.text + "'");
        c.value = static_cast<int>(*t);
      }
    } else {
      c.value = expect_int("integer");
    }
    return c;
  }

  Lexer lex_;
  Token cur_;
  Token stage_name_;
};

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string condition_text(const Condition& c) {
  std::string value;
  switch (c.field) {
    case VitalField::Breathing: value = breathing_id(static_cast<Breathing>(c.value)); break;
    case VitalField::Tone: value = tone_id(static_cast<Tone>(c.value)); break;
    default: value = std::to_string(c.value);
  }
  return std::string(vital_field_id(c.field)) + " " + std::string(comparison_symbol(c.op)) + " " +
         value;
}

}  // namespace

Scenario parse_scenario(std::string_view text) { return Parser(text).parse_file(); }

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "format_version " << kFormatVersion << ";\n\n";
  out << "scenario " << s.id << " {\n";
  out << "  title " << quote(s.title) << ";\n";
  out << "  tier " << s.difficulty_tier << ";\n";
  out << "  guidance " << guidance_mode_id(s.guidance) << ";\n";
  out << "  initial " << s.initial_stage << ";\n";
  out << "  metrics " << s.declared_metrics.optimal_path_length << " "
      << s.declared_metrics.distinct_actions << ";\n";

  if (s.briefing) {
    out << "\n  dialogue " << s.briefing->root << " {\n";
    for (const auto& n : s.briefing->nodes) {
      out << "    say " << n.id << " " << speaker_id(n.speaker) << " " << quote(n.text);
      if (n.audio) out << " audio=" << quote(*n.audio);
      if (n.children.empty()) {
        out << ";\n";
        continue;
      }
      out << " {\n";
      for (const auto& c : n.children) {
        out << "      option " << quote(c.label) << " -> " << c.target << ";\n";
      }
      out << "    }\n";
    }
    out << "  }\n";
  }

  for (const auto& st : s.stages) {
    out << "\n  stage " << st.id << " {\n";
    out << "    prompt " << quote(st.prompt) << ";\n";
    out << "    vitals heart_rate=" << st.vitals.heart_rate
        << " breathing=" << breathing_id(st.vitals.breathing)
        << " tone=" << tone_id(st.vitals.tone) << ";\n";
    if (st.time_budget) out << "    time_budget " << *st.time_budget << ";\n";
    if (st.cue) {
      out << "    cue " << quote(st.cue->text);
      if (st.cue->names_correct_action) out << " names-correct";
      if (st.cue->audio) out << " audio=" << quote(*st.cue->audio);
      out << ";\n";
    }
    for (const auto& e : st.menu) {
      out << "    entry " << action_kind_id(e.kind);
      if (e.param) out << " param=" << quote(*e.param);
      out << (e.correct ? " correct" : " wrong");
      if (e.mistake_utterance) out << " " << quote(*e.mistake_utterance);
      out << ";\n";
    }
    for (const auto& t : st.transitions) {
      out << "    next " << t.target;
      for (std::size_t i = 0; i < t.guard.size(); ++i) {
        out << (i == 0 ? " if " : " and ") << condition_text(t.guard[i]);
      }
      out << ";\n";
    }
    out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, path.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Parses and validates; appends file-qualified diagnostics on failure.
std::optional<Scenario> load_into(const std::filesystem::path& path,
                                  std::vector<std::string>& diagnostics) {
  const std::string name = path.string();
  Scenario scenario;
  try {
    scenario = parse_scenario(read_file(path));
  } catch (const ParseException& e) {
    diagnostics.push_back(name + ":" + e.error().to_string());
    return std::nullopt;
  } catch (const Error& e) {
    diagnostics.push_back(e.what());
    return std::nullopt;
  }
  ValidationReport report = validate_scenario(scenario);
  if (!report.ok()) {
    for (const auto& v : report.violations) {
      std::string where = name;
      if (v.line > 0) where += ":" + std::to_string(v.line);
      diagnostics.push_back(where + ": " + std::string(violation_code_id(v.code)) + ": " +
                            v.message);
    }
    return std::nullopt;
  }
  return scenario;
}

}  // namespace

Scenario load_scenario_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::NotFound, path.string() + ": not found");
  }
  std::vector<std::string> diagnostics;
  auto scenario = load_into(path, diagnostics);
  if (!scenario) throw LibraryError(std::move(diagnostics));
  return std::move(*scenario);
}

ScenarioLibrary load_library(const std::filesystem::path& directory) {
  namespace fs = std::filesystem;
  if (!fs::exists(directory)) throw Error(ErrorKind::NotFound, directory.string() + ": not found");
  if (!fs::is_directory(directory)) {
    throw Error(ErrorKind::Io, directory.string() + ": not a directory");
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == kScenarioExtension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  ScenarioLibrary library;
  std::vector<std::string> diagnostics;
  std::vector<std::pair<Scenario, fs::path>> loaded;
  for (const auto& f : files) {
    if (auto s = load_into(f, diagnostics)) loaded.emplace_back(std::move(*s), f);
  }
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (loaded[i].first.id == loaded[j].first.id) {
        diagnostics.push_back(loaded[i].second.string() + ": duplicate id '" +
                              loaded[i].first.id + "' (also in " + loaded[j].second.string() +
                              ")");
      }
    }
  }
  if (!diagnostics.empty()) throw LibraryError(std::move(diagnostics));

  std::stable_sort(loaded.begin(), loaded.end(), [](const auto& a, const auto& b) {
    if (a.first.difficulty_tier != b.first.difficulty_tier) {
      return a.first.difficulty_tier < b.first.difficulty_tier;
    }
    return a.first.id < b.first.id;
  });
  for (auto& [scenario, path] : loaded) {
    library.scenarios.push_back(std::move(scenario));
    library.sources.push_back(path);
  }
  if (library.scenarios.empty()) {
    library.warnings.push_back(directory.string() + ": no " + std::string(kScenarioExtension) +
                               " files found");
  }
  return library;
}

}  // namespace retain
