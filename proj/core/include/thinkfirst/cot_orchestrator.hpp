// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "thinkfirst/image.hpp"
#include "thinkfirst/mllm_backend.hpp"
#include "thinkfirst/prompt_engine.hpp"
#include "thinkfirst/transcript.hpp"

namespace thinkfirst {

enum class OnFailure { raise, return_degraded };

struct RetryPolicy {
  int max_attempts = 2;
  OnFailure on_failure = OnFailure::raise;

  void validate() const;
};

// Persists raw transcripts as `<root>/transcripts/<request_hash>.txt`.
// Retries of the same request land in `<request_hash>.attempt-<k>.txt`.
class TranscriptLog {
 public:
  explicit TranscriptLog(std::filesystem::path root) : root_(std::move(root)) {}

  void record(const std::string& request_hash, int attempt, const std::string& text);
  std::filesystem::path path_for(const std::string& request_hash, int attempt = 1) const;

 private:
  std::filesystem::path root_;
  std::mutex mu_;
};

struct CotRun {
  CotResult result;
  // Set when every attempt failed to parse and the policy asked for a
  // degraded result: `result.pairs` is empty and `result.summary` is the
  // trimmed last response.
  bool degraded = false;
  std::vector<std::string> transcripts;
  std::string request_hash;
  int backend_calls = 0;
};

// System context plus parts [environment prompt, task prompt, image].
MllmRequest build_cot_request(const ImageRef& image, const PromptBundle& bundle);

// One completion request per attempt; the whole chain of thoughts is
// generated inside that completion. Parse failures are retried up to
// policy.max_attempts calls in total. Backend errors propagate unretried.
CotRun run_cot(MllmBackend& backend, const ImageRef& image, const PromptBundle& bundle,
               const RetryPolicy& policy = {}, TranscriptLog* log = nullptr);

}  // namespace thinkfirst
