// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/cot_orchestrator.hpp"

#include <fstream>

#include "text_util.hpp"
#include "thinkfirst/error.hpp"

namespace thinkfirst {

void RetryPolicy::validate() const {
  if (max_attempts < 1) throw_invalid_argument("retry policy needs max_attempts >= 1");
}

std::filesystem::path TranscriptLog::path_for(const std::string& request_hash, int attempt) const {
  const auto dir = root_ / "transcripts";
  if (attempt <= 1) return dir / (request_hash + ".txt");
  return dir / (request_hash + ".attempt-" + std::to_string(attempt) + ".txt");
}

void TranscriptLog::record(const std::string& request_hash, int attempt, const std::string& text) {
  std::lock_guard lock(mu_);
  std::filesystem::create_directories(root_ / "transcripts");
  std::ofstream out(path_for(request_hash, attempt), std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::load, "cannot write transcript log under " + root_.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

MllmRequest build_cot_request(const ImageRef& image, const PromptBundle& bundle) {
  bundle.validate();
  MllmRequest request;
  request.system_context = bundle.system_context;
  request.parts.emplace_back(TextPart{bundle.environment_prompt});
  request.parts.emplace_back(TextPart{bundle.task_prompt});
  request.parts.emplace_back(ImagePart{image});
  request.temperature = bundle.temperature;
  request.max_output_tokens = bundle.max_output_tokens;
  return request;
}

CotRun run_cot(MllmBackend& backend, const ImageRef& image, const PromptBundle& bundle,
               const RetryPolicy& policy, TranscriptLog* log) {
  policy.validate();
  const MllmRequest request = build_cot_request(image, bundle);

  CotRun run;
  run.request_hash = request_hash(request);
  std::string last_error;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    std::string text = backend.complete(request);
    ++run.backend_calls;
    if (log != nullptr) log->record(run.request_hash, attempt, text);
    run.transcripts.push_back(text);
    try {
      run.result = parse_transcript(text);
      return run;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::transcript_format) throw;
      last_error = e.message();
    }
  }

  const std::string& last = run.transcripts.back();
  if (policy.on_failure == OnFailure::return_degraded && !detail::trim(last).empty()) {
    run.degraded = true;
    run.result = CotResult{};
    run.result.summary = std::string(detail::trim(last));
    run.result.raw_transcript = last;
    return run;
  }
  throw Error(ErrorKind::transcript_format,
              "no parsable transcript after " + std::to_string(run.backend_calls) +
                  " attempt(s): " + last_error,
              "cot-parse", last);
}

}  // namespace thinkfirst
