// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/segmenter_backend.hpp"

#include <algorithm>

#include "text_util.hpp"
#include "thinkfirst/error.hpp"

namespace thinkfirst {

BinaryMask SegmenterBackend::segment_text(const ImageRef& image, std::string_view prompt) {
  if (detail::trim(prompt).empty()) throw_invalid_argument("segmentation prompt is empty");
  BinaryMask mask = do_segment(image, prompt);
  if (mask.width() != image.width() || mask.height() != image.height()) {
    throw Error(ErrorKind::backend,
                "segmenter " + descriptor().name + " returned a " + std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height()) + " mask for a " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()) + " image");
  }
  return mask;
}

BinaryMask rasterize_box(const PixelBox& box, int width, int height) {
  BinaryMask mask(width, height);
  const int x0 = std::max(box.x0, 0);
  const int y0 = std::max(box.y0, 0);
  const int x1 = std::min(box.x1, width - 1);
  const int y1 = std::min(box.y1, height - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) mask.set(x, y);
  }
  return mask;
}

KeywordMockSegmenter::KeywordMockSegmenter(std::vector<KeywordRule> rules, std::string name)
    : rules_(std::move(rules)), name_(std::move(name)) {}

BackendDescriptor KeywordMockSegmenter::descriptor() const {
  return {name_, BackendKind::segmenter, true, {{"rules", std::to_string(rules_.size())}}};
}

BinaryMask KeywordMockSegmenter::do_segment(const ImageRef& image, std::string_view prompt) {
  const std::string haystack = detail::lower_ascii(prompt);
  const KeywordRule* best = nullptr;
  std::size_t best_hits = 0;
  for (const auto& rule : rules_) {
    std::size_t hits = 0;
    for (const auto& trigger : rule.triggers) {
      if (!trigger.empty() && haystack.find(detail::lower_ascii(trigger)) != std::string::npos) ++hits;
    }
    if (hits > best_hits) {
      best = &rule;
      best_hits = hits;
    }
  }
  if (best == nullptr) return BinaryMask(image.width(), image.height());
  if (const auto* box = std::get_if<PixelBox>(&best->region)) {
    return rasterize_box(*box, image.width(), image.height());
  }
  return std::get<BinaryMask>(best->region);
}

}  // namespace thinkfirst
