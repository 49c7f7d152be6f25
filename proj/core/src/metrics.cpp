// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/metrics.hpp"

#include <algorithm>

#include "thinkfirst/error.hpp"

namespace thinkfirst {

OverlapCounts overlap(const BinaryMask& pred, const BinaryMask& gt) {
  if (!pred.same_shape(gt)) {
    throw_invalid_argument("mask shapes differ: " + std::to_string(pred.width()) + "x" +
                           std::to_string(pred.height()) + " vs " + std::to_string(gt.width()) + "x" +
                           std::to_string(gt.height()));
  }
  const auto a = pred.cells();
  const auto b = gt.cells();
  OverlapCounts c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.intersection += static_cast<std::uint64_t>(a[i] & b[i]);
    c.union_ += static_cast<std::uint64_t>(a[i] | b[i]);
  }
  return c;
}

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  const OverlapCounts c = overlap(pred, gt);
  if (c.union_ == 0) return 1.0;
  return static_cast<double>(c.intersection) / static_cast<double>(c.union_);
}

MetricsReport summarize(std::vector<SampleScore> scores, RunDescriptor config) {
  if (scores.empty()) throw_invalid_argument("cannot aggregate an empty sample list");
  std::vector<double> ious;
  ious.reserve(scores.size());
  std::uint64_t inter = 0;
  std::uint64_t uni = 0;
  for (const auto& s : scores) {
    ious.push_back(s.iou);
    inter += s.intersection;
    uni += s.union_;
  }
  // sorted summation keeps the mean bit-identical under reordering
  std::sort(ious.begin(), ious.end());
  double sum = 0.0;
  for (double v : ious) sum += v;

  MetricsReport report;
  report.giou = sum / static_cast<double>(ious.size());
  report.ciou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  report.per_sample = std::move(scores);
  report.config = std::move(config);
  return report;
}

MetricsReport aggregate(std::span<const std::pair<BinaryMask, BinaryMask>> pairs) {
  std::vector<SampleScore> scores;
  scores.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const OverlapCounts c = overlap(pairs[i].first, pairs[i].second);
    SampleScore s;
    s.id = std::to_string(i);
    s.intersection = c.intersection;
    s.union_ = c.union_;
    s.iou = c.union_ == 0 ? 1.0 : static_cast<double>(c.intersection) / static_cast<double>(c.union_);
    scores.push_back(std::move(s));
  }
  return summarize(std::move(scores));
}

}  // namespace thinkfirst
