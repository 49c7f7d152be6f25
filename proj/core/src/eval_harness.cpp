// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/eval_harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "thinkfirst/error.hpp"

namespace thinkfirst {

TaskMode eval_task_mode(const EvalSample& sample, const EvalOptions& options) {
  if (options.task_mode) return *options.task_mode;
  if (options.query_kind == QueryKind::explicit_object) return TaskMode::explicit_object(sample.object_class.value_or(""));
  return TaskMode::camouflage();
}

namespace {

SampleScore score_sample(const EvalSample& sample, Pipeline& pipeline, const EvalOptions& options) {
  SampleScore score;
  score.id = sample.id;
  BinaryMask gt = sample.gt_mask();
  try {
    const ImageRef image = sample.image();
    const std::string query = build_user_query(options.query_kind, sample.object_class.value_or(""));
    const SegmentationOutcome outcome = pipeline.segment(image, query, eval_task_mode(sample, options), options.mode);
    const OverlapCounts c = overlap(outcome.mask, gt);
    score.intersection = c.intersection;
    score.union_ = c.union_;
    score.iou = c.union_ == 0 ? 1.0 : static_cast<double>(c.intersection) / static_cast<double>(c.union_);
  } catch (const std::exception& e) {
    score.iou = 0.0;
    score.intersection = 0;
    score.union_ = gt.count();
    score.error = e.what();
  }
  return score;
}

}  // namespace

MetricsReport run_eval(const DatasetManifest& manifest, Pipeline& pipeline, const EvalOptions& options) {
  if (manifest.samples.empty()) throw Error(ErrorKind::load, "manifest has no samples");
  if (options.query_kind == QueryKind::explicit_object) {
    for (const auto& s : manifest.samples) {
      if (!s.object_class) throw_invalid_argument("explicit queries need an object class; sample '" + s.id + "' has none");
    }
  }

  const std::size_t n = manifest.samples.size();
  std::vector<SampleScore> scores(n);
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.parallelism, 1)), 1, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        scores[i] = score_sample(manifest.samples[i], pipeline, options);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  RunDescriptor config;
  config.mode = std::string(to_string(options.mode));
  config.query_kind = std::string(to_string(options.query_kind));
  config.mllm = (options.mode != PipelineMode::baseline_no_mllm && pipeline.backends().mllm)
                    ? pipeline.backends().mllm->descriptor().name
                    : "-";
  config.segmenter = pipeline.backends().segmenter->descriptor().name;
  config.dataset = manifest.name;
  return summarize(std::move(scores), std::move(config));
}

}  // namespace thinkfirst
