// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/pipeline.hpp"

#include <chrono>

#include "text_util.hpp"
#include "thinkfirst/digest.hpp"
#include "thinkfirst/error.hpp"

namespace thinkfirst {

std::string_view to_string(PipelineMode mode) noexcept {
  switch (mode) {
    case PipelineMode::full: return "full";
    case PipelineMode::baseline_no_mllm: return "baseline_no_mllm";
    case PipelineMode::describe_no_cot: return "describe_no_cot";
  }
  return "full";
}

PipelineMode parse_pipeline_mode(std::string_view text) {
  if (text == "full") return PipelineMode::full;
  if (text == "baseline" || text == "baseline_no_mllm") return PipelineMode::baseline_no_mllm;
  if (text == "describe" || text == "describe_no_cot") return PipelineMode::describe_no_cot;
  throw_invalid_argument("unknown pipeline mode '" + std::string(text) + "' (expected full, baseline or describe)");
}

std::string_view to_string(Flow flow) noexcept {
  switch (flow) {
    case Flow::segment: return "segment";
    case Flow::control: return "control";
    case Flow::waldo: return "waldo";
    case Flow::refine: return "refine";
  }
  return "segment";
}

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  }
}

template <class F>
auto timed(std::vector<StageTiming>& timings, const char* stage, F&& fn) -> decltype(fn()) {
  const auto start = Clock::now();
  struct Record {
    std::vector<StageTiming>& timings;
    const char* stage;
    Clock::time_point start;
    ~Record() {
      timings.push_back({stage, std::chrono::duration<double>(Clock::now() - start).count()});
    }
  } record{timings, stage, start};
  return fn();
}

void append_field(std::string& buf, std::string_view key, std::string_view value) {
  buf += key;
  buf += ':';
  buf += std::to_string(value.size());
  buf += ':';
  buf += value;
  buf += '\n';
}

}  // namespace

Pipeline::Pipeline(Backends backends, PromptLibrary prompts, PipelineOptions options)
    : backends_(std::move(backends)), prompts_(std::move(prompts)), options_(std::move(options)) {
  if (!backends_.segmenter) throw Error(ErrorKind::configuration, "pipeline needs a segmenter backend");
  options_.retry.validate();
  segmenter_safe_ = backends_.segmenter->descriptor().concurrency_safe;
  if (options_.transcript_dir) transcript_log_ = std::make_unique<TranscriptLog>(*options_.transcript_dir);
}

MllmBackend& Pipeline::mllm(const char* stage) const {
  if (!backends_.mllm) throw Error(ErrorKind::configuration, "this mode needs an MLLM backend", stage);
  return *backends_.mllm;
}

CotRun Pipeline::run_cot_staged(const ImageRef& image, const PromptBundle& bundle, SegmentationOutcome& out) {
  MllmBackend& backend = mllm("mllm");
  CotRun run = timed(out.timings, "mllm", [&] {
    return staged("mllm", [&] { return run_cot(backend, image, bundle, options_.retry, transcript_log_.get()); });
  });
  out.mllm_calls += run.backend_calls;
  out.request_hash = run.request_hash;
  out.cot = run.result;
  out.cot_degraded = run.degraded;
  return run;
}

BinaryMask Pipeline::segment_staged(const ImageRef& image, const std::string& prompt, SegmentationOutcome& out) {
  return timed(out.timings, "segment", [&] {
    return staged("segment", [&] {
      if (segmenter_safe_) return backends_.segmenter->segment_text(image, prompt);
      std::lock_guard gate(segmenter_gate_);
      return backends_.segmenter->segment_text(image, prompt);
    });
  });
}

void Pipeline::finish(SegmentationOutcome& out, const ImageRef& image) const {
  std::string key = "thinkfirst-outcome/v1\n";
  append_field(key, "flow", to_string(out.flow));
  append_field(key, "mode", to_string(out.mode));
  append_field(key, "parent", out.parent_id.value_or(""));
  append_field(key, "query", out.user_query);
  append_field(key, "prompt", out.composed_prompt);
  append_field(key, "request", out.request_hash);
  append_field(key, "annotation", out.annotation ? out.annotation->to_literal() : "");
  append_field(key, "image", sha256_hex(image.bytes()));
  const auto cells = out.mask.cells();
  append_field(key, "mask", sha256_hex(cells));
  out.id = sha256_hex(key).substr(0, 32);
}

SegmentationOutcome Pipeline::segment(const ImageRef& image, std::string_view user_query, const TaskMode& task_mode,
                                      PipelineMode mode) {
  if (detail::trim(user_query).empty()) throw Error(ErrorKind::invalid_argument, "user query is empty", "segment");
  SegmentationOutcome out;
  out.flow = Flow::segment;
  out.mode = mode;
  out.user_query = std::string(user_query);

  switch (mode) {
    case PipelineMode::full: {
      const CotRun run = run_cot_staged(image, prompts_.bundle(task_mode, options_.sampling), out);
      out.composed_prompt = compose_query(run.result.summary, user_query);
      break;
    }
    case PipelineMode::describe_no_cot: {
      MllmBackend& backend = mllm("describe");
      MllmRequest request;
      request.system_context = prompts_.system_context();
      request.parts.emplace_back(TextPart{prompts_.build_task_prompt(TaskMode::standard())});
      request.parts.emplace_back(ImagePart{image});
      request.temperature = options_.sampling.temperature;
      request.max_output_tokens = options_.sampling.max_output_tokens;
      out.request_hash = request_hash(request);
      const std::string text =
          timed(out.timings, "mllm", [&] { return staged("mllm", [&] { return backend.complete(request); }); });
      ++out.mllm_calls;
      if (transcript_log_) transcript_log_->record(out.request_hash, 1, text);
      const std::string_view description = detail::trim(text);
      if (description.empty()) {
        throw Error(ErrorKind::transcript_format, "empty image description", "describe", text);
      }
      CotResult cot;
      cot.summary = std::string(description);
      cot.raw_transcript = text;
      out.cot = std::move(cot);
      out.composed_prompt = compose_query(description, user_query);
      break;
    }
    case PipelineMode::baseline_no_mllm:
      out.composed_prompt = std::string(user_query);
      break;
  }

  out.mask = segment_staged(image, out.composed_prompt, out);
  finish(out, image);
  return out;
}

SegmentationOutcome Pipeline::segment_with_control(const ImageRef& image, const ControlAnnotation& annotation) {
  SegmentationOutcome out;
  out.flow = Flow::control;
  out.mode = PipelineMode::full;
  out.annotation = annotation;

  const AnnotatedImage annotated =
      timed(out.timings, "annotate", [&] { return staged("annotate", [&] { return render_annotation(image, annotation); }); });
  const CotRun run = run_cot_staged(annotated.image, prompts_.bundle(TaskMode::control(), options_.sampling), out);
  if (!run.result.pseudo_prompt || detail::trim(*run.result.pseudo_prompt).empty()) {
    throw Error(ErrorKind::control_protocol, "transcript has no Prompt item", "control", run.result.raw_transcript);
  }
  out.composed_prompt = *run.result.pseudo_prompt;
  out.mask = segment_staged(image, out.composed_prompt, out);
  finish(out, image);
  return out;
}

SegmentationOutcome Pipeline::find_waldo(const ImageRef& image) {
  SegmentationOutcome out;
  out.flow = Flow::waldo;
  out.mode = PipelineMode::full;

  const CotRun run = run_cot_staged(image, prompts_.bundle(TaskMode::waldo(), options_.sampling), out);
  if (!run.result.pseudo_prompt) {
    throw Error(ErrorKind::waldo_protocol, "transcript has no Prompt item", "waldo", run.result.raw_transcript);
  }
  const std::string& prompt = *run.result.pseudo_prompt;
  if (!prompt.starts_with(kWaldoPromptStem)) {
    throw Error(ErrorKind::waldo_protocol,
                "prompt must start with \"" + std::string(kWaldoPromptStem) + "\", got \"" + detail::preview(prompt, 60) +
                    "\"",
                "waldo", run.result.raw_transcript);
  }
  out.composed_prompt = prompt;
  out.mask = segment_staged(image, out.composed_prompt, out);
  finish(out, image);
  return out;
}

SegmentationOutcome Pipeline::refine(const SegmentationOutcome& previous, const ImageRef& image,
                                     const ControlAnnotation& annotation) {
  SegmentationOutcome out = segment_with_control(image, annotation);
  out.flow = Flow::refine;
  out.parent_id = previous.id;
  finish(out, image);
  return out;
}

}  // namespace thinkfirst
