// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thinkfirst/mask.hpp"

namespace thinkfirst {

struct OverlapCounts {
  std::uint64_t intersection = 0;
  std::uint64_t union_ = 0;
};

// Throws Error(invalid_argument) when the shapes differ.
OverlapCounts overlap(const BinaryMask& pred, const BinaryMask& gt);

// |pred & gt| / |pred | gt|; 1.0 when both are empty, 0.0 when exactly one is.
double iou(const BinaryMask& pred, const BinaryMask& gt);

struct SampleScore {
  std::string id;
  double iou = 0.0;
  std::uint64_t intersection = 0;
  std::uint64_t union_ = 0;
  std::optional<std::string> error;  // set when the sample failed and scored 0

  friend bool operator==(const SampleScore&, const SampleScore&) = default;
};

// What produced a report.
struct RunDescriptor {
  std::string mode;
  std::string query_kind;
  std::string mllm;
  std::string segmenter;
  std::string dataset;

  friend bool operator==(const RunDescriptor&, const RunDescriptor&) = default;
};

struct MetricsReport {
  std::vector<SampleScore> per_sample;
  double giou = 0.0;
  double ciou = 0.0;
  RunDescriptor config;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// giou = mean IoU, ciou = sum(I) / sum(U) (1.0 if every union is 0). The
// result does not depend on the order of `scores`. Throws on an empty list.
MetricsReport summarize(std::vector<SampleScore> scores, RunDescriptor config = {});

// Scores (pred, gt) pairs, ids "0", "1", ...
MetricsReport aggregate(std::span<const std::pair<BinaryMask, BinaryMask>> pairs);

}  // namespace thinkfirst
