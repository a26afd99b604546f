#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace retain {

enum class ErrorKind {
  InvalidArgument,
  Parse,
  InvalidScenario,
  NoSavePath,
  Library,
  SessionEnded,
  UnknownAction,
  ReplayDivergence,
  InvalidChoice,
  BudgetExceeded,
  NotFound,
  NotEnded,
  Io,
  Contract,
  Conflict,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

// Base for every error the core raises. The kind is the machine-readable
// class used by the C API and the HTTP layer.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

// Raised by replay when a recorded step cannot be re-applied.
class ReplayDivergence : public Error {
public:
  ReplayDivergence(std::size_t step, const std::string& message)
    : Error(ErrorKind::ReplayDivergence,
            "replay diverged at step " + std::to_string(step) + ": " + message),
      step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

// Raised by dialogue traversal; depth is the 0-based index into the path.
class InvalidChoice : public Error {
public:
  InvalidChoice(std::size_t depth, const std::string& message)
    : Error(ErrorKind::InvalidChoice, message), depth_(depth) {}

  std::size_t depth() const noexcept { return depth_; }

private:
  std::size_t depth_;
};

}  // namespace retain
