#pragma once

#include "retain/error.hpp"
#include "retain/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace retain {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kScenarioExtension = ".retain";

struct ParseError {
  int line = 1;    // 1-based
  int column = 1;  // 1-based, in code points
  std::string message;
  std::optional<std::string> expected;

  std::string to_string() const;
};

class ParseException : public Error {
public:
  explicit ParseException(ParseError error)
    : Error(ErrorKind::Parse, error.to_string()), error_(std::move(error)) {}

  const ParseError& error() const noexcept { return error_; }

private:
  ParseError error_;
};

// Carries one line per failing file ("path:line:col: message").
class LibraryError : public Error {
public:
  explicit LibraryError(std::vector<std::string> diagnostics);

  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
  std::vector<std::string> diagnostics_;
};

// Throws ParseException on the first syntax error. Only checks syntax, unique
// ids and the action vocabulary; call validate_scenario for the rest.
Scenario parse_scenario(std::string_view text);

// Canonical text: two-space indent, fixed field order, text values quoted.
std::string serialize_scenario(const Scenario& scenario);

// Reads, parses and validates one file. Throws LibraryError with file-qualified
// diagnostics on any failure.
Scenario load_scenario_file(const std::filesystem::path& path);

// Loads every *.retain file in a directory, ordered by tier then id.
ScenarioLibrary load_library(const std::filesystem::path& directory);

}  // namespace retain
