#pragma once

#include <stdexcept>
#include <string>

namespace moodsense {

/// Broad failure class; the CLI maps these onto exit codes.
enum class ErrorKind {
  InvalidArgument,  // caller broke a precondition (bad config, bad probability)
  Data,             // input data is malformed or insufficient
  Io,               // filesystem trouble
};

/// Library exception. `code()` is a stable machine-readable tag such as
/// "EXAM_SCORE_RANGE" or "TOO_FEW_ROWS".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

/// Parse failure pinned to a file position (1-based line and column).
class ParseError : public Error {
 public:
  ParseError(std::string code, std::string file, int line, int column, const std::string& message)
      : Error(ErrorKind::Data, std::move(code),
              file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        file_(std::move(file)),
        line_(line),
        column_(column) {}

  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  std::string file_;
  int line_;
  int column_;
};

}  // namespace moodsense
