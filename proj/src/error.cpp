#include "rlmc/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace rlmc {

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return h;
}

}  // namespace

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ZeroObjective: return "ZeroObjective";
    case ErrorKind::InvalidWeights: return "InvalidWeights";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::StreamTooShort: return "StreamTooShort";
    case ErrorKind::DegenerateInstance: return "DegenerateInstance";
    case ErrorKind::NoChunkFound: return "NoChunkFound";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::LabelError: return "LabelError";
    case ErrorKind::NonBinaryLabels: return "NonBinaryLabels";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

WarningHandler set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  return std::exchange(handler(), std::move(h));
}

void warn(const std::string& message) {
  std::lock_guard lock(handler_mutex());
  if (handler()) handler()(message);
}

}  // namespace rlmc
