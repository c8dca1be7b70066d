#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace logitmat {

enum class ErrorKind {
  kInvalidArgument,
  kInvalidScale,
  kInvalidShape,
  kIndexOutOfRange,
  kEmptyDataset,
  kMalformedLine,
  kRatingOutOfRange,
  kSchema,
  kParse,
  kDivergence,
  kCoverage,
  kIo,
  kFormat,
  kVersionMismatch,
  kTruncated,
  kShapeMismatch,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library. `line()` is set for errors that
// originate from a specific input line (1-based); `step()` for divergence.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  static Error at_line(ErrorKind kind, std::size_t line, const std::string& message) {
    Error e(kind, "line " + std::to_string(line) + ": " + message);
    e.line_ = line;
    return e;
  }

  static Error at_step(std::size_t step, const std::string& message) {
    Error e(ErrorKind::kDivergence, "step " + std::to_string(step) + ": " + message);
    e.step_ = step;
    return e;
  }

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> line_;
  std::optional<std::size_t> step_;
};

}  // namespace logitmat
