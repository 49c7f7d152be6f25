// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thinkfirst {

enum class ErrorKind {
  invalid_argument,
  configuration,
  transcript_format,
  backend,
  fixture_missing,
  control_protocol,
  waldo_protocol,
  load,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the toolkit. `stage` is filled in by the
// pipeline ("cot-parse", "mllm", "segment", ...) so the CLI and the service
// can report where a run failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string stage = {});
  Error(ErrorKind kind, std::string message, std::string stage, std::string detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& message() const noexcept { return message_; }
  // Supplementary payload, e.g. the last raw transcript for format errors.
  const std::string& detail() const noexcept { return detail_; }

  // Copy of this error carrying `stage` (keeps an existing stage).
  Error with_stage(std::string stage) const;

  // True for transport/fixture failures, i.e. problems outside the input.
  bool is_backend_failure() const noexcept {
    return kind_ == ErrorKind::backend || kind_ == ErrorKind::fixture_missing;
  }

 private:
  ErrorKind kind_;
  std::string message_;
  std::string stage_;
  std::string detail_;
};

[[noreturn]] void throw_invalid_argument(std::string message);

}  // namespace thinkfirst
