// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "thinkfirst/manifest.hpp"
#include "thinkfirst/metrics.hpp"
#include "thinkfirst/pipeline.hpp"
#include "thinkfirst/prompt_engine.hpp"

namespace thinkfirst {

struct EvalOptions {
  QueryKind query_kind = QueryKind::implicit;
  PipelineMode mode = PipelineMode::full;
  int parallelism = 1;
  // Default: camouflage for implicit queries, explicit_object(<class>) for
  // explicit ones.
  std::optional<TaskMode> task_mode;
};

// The task mode used for a sample under `options`.
TaskMode eval_task_mode(const EvalSample& sample, const EvalOptions& options);

// Runs the pipeline on every sample and scores it against the ground truth.
// A failing sample scores IoU 0 (intersection 0, union |gt|) with an error
// note. per_sample follows manifest order whatever the parallelism.
// Throws Error(invalid_argument) if explicit queries meet a sample without
// an object class.
MetricsReport run_eval(const DatasetManifest& manifest, Pipeline& pipeline, const EvalOptions& options);

enum class ReportStyle { table, json };

// table: one aligned row per report with gIoU/cIoU as percentages, one
// decimal. json: the full record, readable back with parse_report_json.
std::string render_report(const MetricsReport& report, ReportStyle style);
std::string render_table(std::span<const MetricsReport> reports);
MetricsReport parse_report_json(std::string_view text);

std::string format_percent(double value);

}  // namespace thinkfirst
