// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "thinkfirst/image.hpp"
#include "thinkfirst/mask.hpp"
#include "thinkfirst/mllm_backend.hpp"

namespace thinkfirst {

// The reasoning-segmentation agent, treated as a black box mapping
// (image, text) to a mask.
class SegmenterBackend {
 public:
  virtual ~SegmenterBackend() = default;

  // Rejects an empty prompt and any mask whose dimensions differ from the
  // image (Error(backend)).
  BinaryMask segment_text(const ImageRef& image, std::string_view prompt);

  virtual BackendDescriptor descriptor() const = 0;
  virtual bool probe() const { return true; }

 protected:
  virtual BinaryMask do_segment(const ImageRef& image, std::string_view prompt) = 0;
};

// Inclusive pixel rectangle, clipped to the image when rasterized.
struct PixelBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
};

BinaryMask rasterize_box(const PixelBox& box, int width, int height);

struct KeywordRule {
  std::vector<std::string> triggers;
  // An exact mask (must match the image size) or a box rasterized at the
  // queried image's size.
  std::variant<BinaryMask, PixelBox> region;
};

// Deterministic stand-in for the agent. The rule with the most trigger
// words contained in the prompt (ASCII case-insensitive) wins; ties go to
// the earliest rule; no match yields an all-background mask.
class KeywordMockSegmenter final : public SegmenterBackend {
 public:
  explicit KeywordMockSegmenter(std::vector<KeywordRule> rules = {}, std::string name = "keyword-mock");

  void add_rule(KeywordRule rule) { rules_.push_back(std::move(rule)); }
  const std::vector<KeywordRule>& rules() const noexcept { return rules_; }

  BackendDescriptor descriptor() const override;

 protected:
  BinaryMask do_segment(const ImageRef& image, std::string_view prompt) override;

 private:
  std::vector<KeywordRule> rules_;
  std::string name_;
};

// Adapter for an external agent process (e.g. a LISA-13B-Llama2 server run
// in fp16 with 8-bit quantization) speaking a line protocol over stdio:
//
//   -> SEGMENT <image_path> <base64(prompt utf-8)>\n
//   <- MASK <mask_path>\n      or      ERROR <message>\n
//
// The mask file is a single-channel 8-bit PNG, nonzero = foreground. The
// process is started lazily and restarted after it dies. Not concurrency
// safe; callers serialize (the pipeline does).
class SubprocessSegmenter final : public SegmenterBackend {
 public:
  struct Options {
    std::vector<std::string> command;
    std::string name = "lisa";
    // Where request images are written; defaults to a fresh temp directory.
    std::filesystem::path work_dir;
    int response_timeout_seconds = 600;
  };

  explicit SubprocessSegmenter(Options options);
  ~SubprocessSegmenter() override;
  SubprocessSegmenter(const SubprocessSegmenter&) = delete;
  SubprocessSegmenter& operator=(const SubprocessSegmenter&) = delete;

  BackendDescriptor descriptor() const override;
  bool probe() const override;

  std::size_t requests_sent() const noexcept { return requests_; }

 protected:
  BinaryMask do_segment(const ImageRef& image, std::string_view prompt) override;

 private:
  void ensure_running();
  void shutdown() noexcept;
  std::string read_line();

  Options options_;
  std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
  std::size_t requests_ = 0;
  bool owns_work_dir_ = false;
};

}  // namespace thinkfirst
