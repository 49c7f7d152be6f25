// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thinkfirst/control_annotations.hpp"
#include "thinkfirst/cot_orchestrator.hpp"
#include "thinkfirst/image.hpp"
#include "thinkfirst/mask.hpp"
#include "thinkfirst/mllm_backend.hpp"
#include "thinkfirst/prompt_engine.hpp"
#include "thinkfirst/segmenter_backend.hpp"
#include "thinkfirst/transcript.hpp"

namespace thinkfirst {

enum class PipelineMode { full, baseline_no_mllm, describe_no_cot };

// "full", "baseline_no_mllm", "describe_no_cot".
std::string_view to_string(PipelineMode mode) noexcept;
// Also accepts the short forms "baseline" and "describe".
PipelineMode parse_pipeline_mode(std::string_view text);

enum class Flow { segment, control, waldo, refine };
std::string_view to_string(Flow flow) noexcept;

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct SegmentationOutcome {
  // Content hash of the run (flow, mode, parent, prompts, request, image,
  // mask); identical inputs with replay backends give identical ids.
  std::string id;
  std::optional<std::string> parent_id;
  Flow flow = Flow::segment;
  PipelineMode mode = PipelineMode::full;

  BinaryMask mask;
  // full and control flows: the parsed chain of thoughts. describe_no_cot:
  // no pairs, summary = the whole description.
  std::optional<CotResult> cot;
  bool cot_degraded = false;
  std::string user_query;
  std::string composed_prompt;
  std::optional<ControlAnnotation> annotation;

  std::string request_hash;  // empty when no MLLM call was made
  int mllm_calls = 0;
  std::vector<StageTiming> timings;
};

struct Backends {
  std::shared_ptr<MllmBackend> mllm;            // may be null for baseline-only use
  std::shared_ptr<SegmenterBackend> segmenter;  // required
};

struct PipelineOptions {
  RetryPolicy retry;
  SamplingParams sampling;
  // When set, raw transcripts go to `<dir>/transcripts/<request_hash>.txt`.
  std::optional<std::filesystem::path> transcript_dir;
};

inline constexpr std::string_view kWaldoPromptStem = "Please segment the boy";

// Every error leaving the pipeline carries a stage label: "mllm",
// "cot-parse", "describe", "annotate", "control", "waldo" or "segment".
class Pipeline {
 public:
  Pipeline(Backends backends, PromptLibrary prompts, PipelineOptions options = {});

  // full: CoT, then the segmenter gets "<summary> <query>".
  // describe_no_cot: one plain description request (no environment prompt),
  //   the whole response is the summary.
  // baseline_no_mllm: the segmenter gets the query alone; no MLLM call.
  SegmentationOutcome segment(const ImageRef& image, std::string_view user_query, const TaskMode& task_mode,
                              PipelineMode mode = PipelineMode::full);

  // CoT on the annotated image, then the transcript's pseudo-prompt is used
  // on the ORIGINAL image.
  SegmentationOutcome segment_with_control(const ImageRef& image, const ControlAnnotation& annotation);

  SegmentationOutcome find_waldo(const ImageRef& image);

  // Stateless re-execution of segment_with_control linked to `previous`.
  SegmentationOutcome refine(const SegmentationOutcome& previous, const ImageRef& image,
                             const ControlAnnotation& annotation);

  const Backends& backends() const noexcept { return backends_; }
  const PromptLibrary& prompts() const noexcept { return prompts_; }
  const PipelineOptions& options() const noexcept { return options_; }

 private:
  MllmBackend& mllm(const char* stage) const;
  CotRun run_cot_staged(const ImageRef& image, const PromptBundle& bundle, SegmentationOutcome& out);
  BinaryMask segment_staged(const ImageRef& image, const std::string& prompt, SegmentationOutcome& out);
  void finish(SegmentationOutcome& out, const ImageRef& image) const;

  Backends backends_;
  PromptLibrary prompts_;
  PipelineOptions options_;
  std::unique_ptr<TranscriptLog> transcript_log_;
  bool segmenter_safe_ = true;
  std::mutex segmenter_gate_;
};

}  // namespace thinkfirst
