// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/error.hpp"

#include <utility>

namespace thinkfirst {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::transcript_format: return "transcript-format";
    case ErrorKind::backend: return "backend";
    case ErrorKind::fixture_missing: return "fixture-missing";
    case ErrorKind::control_protocol: return "control-protocol";
    case ErrorKind::waldo_protocol: return "waldo-protocol";
    case ErrorKind::load: return "load";
  }
  return "unknown";
}

namespace {
std::string format_what(ErrorKind kind, const std::string& message, const std::string& stage) {
  std::string out;
  if (!stage.empty()) {
    out += "[";
    out += stage;
    out += "] ";
  }
  out += to_string(kind);
  out += ": ";
  out += message;
  return out;
}
}  // namespace

Error::Error(ErrorKind kind, std::string message, std::string stage)
    : std::runtime_error(format_what(kind, message, stage)),
      kind_(kind),
      message_(std::move(message)),
      stage_(std::move(stage)) {}

Error::Error(ErrorKind kind, std::string message, std::string stage, std::string detail)
    : Error(kind, std::move(message), std::move(stage)) {
  detail_ = std::move(detail);
}

Error Error::with_stage(std::string stage) const {
  if (!stage_.empty()) return *this;
  return Error(kind_, message_, std::move(stage), detail_);
}

void throw_invalid_argument(std::string message) {
  throw Error(ErrorKind::invalid_argument, std::move(message));
}

}  // namespace thinkfirst
