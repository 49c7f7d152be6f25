// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "thinkfirst/error.hpp"

namespace tf_test {

using namespace thinkfirst;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("thinkfirst-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ImageRef solid_image(int w, int h, Rgb color) { return ImageRef::from_raster(Raster(w, h, color)); }

ImageRef fixture_image(const std::string& name) { return ImageRef::from_file(fixtures() / "images" / name); }

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
  std::bernoulli_distribution on(density);
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(w) * h);
  for (auto& c : cells) c = on(rng) ? 1 : 0;
  return BinaryMask(w, h, std::move(cells));
}

ScriptedMllm::ScriptedMllm(std::vector<std::string> replies, std::string name)
    : replies_(std::move(replies)), name_(std::move(name)) {}

ScriptedMllm::ScriptedMllm(std::function<std::string(const MllmRequest&)> fn, std::string name)
    : fn_(std::move(fn)), name_(std::move(name)) {}

BackendDescriptor ScriptedMllm::descriptor() const { return {name_, BackendKind::mllm, true, {}}; }

std::vector<MllmRequest> ScriptedMllm::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::string ScriptedMllm::do_complete(const MllmRequest& request) {
  std::size_t n = 0;
  {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
    n = requests_.size();
  }
  ++calls_;
  if (fn_) return fn_(request);
  if (replies_.empty()) throw Error(ErrorKind::backend, "no scripted reply");
  return replies_[std::min(n, replies_.size()) - 1];
}

SpySegmenter::SpySegmenter(std::vector<KeywordRule> rules, bool concurrency_safe)
    : inner_(std::move(rules)), safe_(concurrency_safe) {}

BackendDescriptor SpySegmenter::descriptor() const { return {"spy", BackendKind::segmenter, safe_, {}}; }

std::vector<SpySegmenter::Call> SpySegmenter::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

BinaryMask SpySegmenter::do_segment(const ImageRef& image, std::string_view prompt) {
  const int now = ++in_flight_;
  int seen = max_in_flight_.load();
  while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
  }
  if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
  {
    std::lock_guard lock(mu_);
    calls_.push_back({std::vector<std::uint8_t>(image.bytes().begin(), image.bytes().end()), std::string(prompt)});
  }
  BinaryMask m = inner_.segment_text(image, prompt);
  --in_flight_;
  return m;
}

}  // namespace tf_test
