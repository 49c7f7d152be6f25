// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "thinkfirst/image.hpp"
#include "thinkfirst/mask.hpp"
#include "thinkfirst/mllm_backend.hpp"
#include "thinkfirst/segmenter_backend.hpp"

namespace tf_test {

namespace fs = std::filesystem;

inline fs::path fixtures() { return fs::path(THINKFIRST_TEST_FIXTURES); }
inline fs::path prompt_dir() { return fs::path(THINKFIRST_TEST_PROMPTS); }

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

thinkfirst::ImageRef solid_image(int w, int h, thinkfirst::Rgb color);
thinkfirst::ImageRef fixture_image(const std::string& name);

thinkfirst::BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density);

// Answers from a queue (the last entry repeats), or from a callback.
class ScriptedMllm final : public thinkfirst::MllmBackend {
 public:
  explicit ScriptedMllm(std::vector<std::string> replies, std::string name = "scripted");
  explicit ScriptedMllm(std::function<std::string(const thinkfirst::MllmRequest&)> fn, std::string name = "scripted");

  thinkfirst::BackendDescriptor descriptor() const override;
  int calls() const { return calls_.load(); }
  std::vector<thinkfirst::MllmRequest> requests() const;

 protected:
  std::string do_complete(const thinkfirst::MllmRequest& request) override;

 private:
  std::vector<std::string> replies_;
  std::function<std::string(const thinkfirst::MllmRequest&)> fn_;
  std::string name_;
  std::atomic<int> calls_{0};
  mutable std::mutex mu_;
  std::vector<thinkfirst::MllmRequest> requests_;
};

// Records what reaches the segmenter and delegates to a keyword mock.
class SpySegmenter final : public thinkfirst::SegmenterBackend {
 public:
  explicit SpySegmenter(std::vector<thinkfirst::KeywordRule> rules = {}, bool concurrency_safe = true);

  thinkfirst::BackendDescriptor descriptor() const override;

  struct Call {
    std::vector<std::uint8_t> image_bytes;
    std::string prompt;
  };
  std::vector<Call> calls() const;
  int max_in_flight() const { return max_in_flight_.load(); }
  void set_delay_ms(int ms) { delay_ms_ = ms; }

 protected:
  thinkfirst::BinaryMask do_segment(const thinkfirst::ImageRef& image, std::string_view prompt) override;

 private:
  thinkfirst::KeywordMockSegmenter inner_;
  bool safe_;
  int delay_ms_ = 0;
  mutable std::mutex mu_;
  std::vector<Call> calls_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

}  // namespace tf_test
