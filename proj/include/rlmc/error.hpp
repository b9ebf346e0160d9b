#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace rlmc {

enum class ErrorKind {
  InvalidParameter,
  IndexOutOfRange,
  ZeroObjective,
  InvalidWeights,
  EmptyDataset,
  StreamTooShort,
  DegenerateInstance,
  NoChunkFound,
  ParseError,
  LabelError,
  NonBinaryLabels,
  SchemaMismatch,
  NonFinite,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse failures carry the 1-based line number of the offending record.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::ParseError,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

using WarningHandler = std::function<void(const std::string&)>;

// Installs the sink for library warnings and returns the previous one. The
// default handler prints "warning: <msg>" to stderr.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace rlmc
