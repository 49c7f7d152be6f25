// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/mllm_backend.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <unistd.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "thinkfirst/digest.hpp"
#include "thinkfirst/error.hpp"

namespace thinkfirst {

void MllmRequest::validate() const {
  int images = 0;
  int texts = 0;
  for (const auto& part : parts) {
    if (std::holds_alternative<ImagePart>(part)) {
      ++images;
    } else {
      ++texts;
    }
  }
  if (images != 1) throw_invalid_argument("MLLM request must carry exactly one image");
  if (texts < 1) throw_invalid_argument("MLLM request must carry at least one text part");
  if (max_output_tokens < 1) throw_invalid_argument("max_output_tokens must be positive");
}

const ImageRef& MllmRequest::image() const {
  for (const auto& part : parts) {
    if (const auto* img = std::get_if<ImagePart>(&part)) return img->image;
  }
  throw_invalid_argument("MLLM request has no image");
}

namespace {

void append(std::vector<std::uint8_t>& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
}

void append_blob(std::vector<std::uint8_t>& out, std::string_view tag, std::span<const std::uint8_t> bytes) {
  append(out, tag);
  append(out, fmt::format("{}:", bytes.size()));
  out.insert(out.end(), bytes.begin(), bytes.end());
  out.push_back('\n');
}

std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace

std::vector<std::uint8_t> canonical_request_bytes(const MllmRequest& request) {
  std::vector<std::uint8_t> out;
  append(out, "thinkfirst-mllm-request/v1\n");
  append(out, fmt::format("temperature:{:.6f}\n", request.temperature));
  append(out, fmt::format("max_output_tokens:{}\n", request.max_output_tokens));
  append_blob(out, "system:", as_bytes(request.system_context));
  for (const auto& part : request.parts) {
    if (const auto* text = std::get_if<TextPart>(&part)) {
      append_blob(out, "text:", as_bytes(text->text));
    } else {
      const auto& image = std::get<ImagePart>(part).image;
      append_blob(out, fmt::format("image:{}:", to_string(image.format())), image.bytes());
    }
  }
  return out;
}

std::string request_hash(const MllmRequest& request) {
  return sha256_hex(canonical_request_bytes(request));
}

std::string MllmBackend::complete(const MllmRequest& request) {
  request.validate();
  return do_complete(request);
}

std::optional<std::string> FixtureStore::load(const std::string& hash) const {
  const auto path = path_for(hash);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorKind::load, "fixture is not a regular file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::load, "cannot read fixture " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::load, "cannot read fixture " + path.string());
  return ss.str();
}

void FixtureStore::store(const std::string& hash, const std::string& text) const {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  const auto final_path = path_for(hash);
  const auto tmp = dir_ / fmt::format(".{}.{}.{}.{}.tmp", hash, ::getpid(),
                                      std::hash<std::thread::id>{}(std::this_thread::get_id()),
                                      counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::load, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorKind::load, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::load, "cannot move fixture into place: " + final_path.string());
  }
}

ReplayMllm::ReplayMllm(std::filesystem::path fixture_dir, std::string name)
    : store_(std::move(fixture_dir)), name_(std::move(name)) {}

BackendDescriptor ReplayMllm::descriptor() const {
  return {name_, BackendKind::mllm, true, {{"fixture_dir", store_.dir().string()}}};
}

bool ReplayMllm::probe() const {
  std::error_code ec;
  return std::filesystem::is_directory(store_.dir(), ec);
}

std::string ReplayMllm::do_complete(const MllmRequest& request) {
  const std::string hash = request_hash(request);
  std::optional<std::string> text;
  try {
    text = store_.load(hash);
  } catch (const Error& e) {
    throw Error(ErrorKind::backend, e.message());
  }
  if (!text) {
    throw Error(ErrorKind::fixture_missing,
                "no replay fixture for request " + hash + " in " + store_.dir().string());
  }
  return *text;
}

RecordingMllm::RecordingMllm(std::shared_ptr<MllmBackend> upstream, std::filesystem::path fixture_dir)
    : upstream_(std::move(upstream)), store_(std::move(fixture_dir)) {
  if (!upstream_) throw_invalid_argument("recording backend needs an upstream backend");
}

BackendDescriptor RecordingMllm::descriptor() const {
  BackendDescriptor d = upstream_->descriptor();
  d.name = "record(" + d.name + ")";
  d.config["fixture_dir"] = store_.dir().string();
  return d;
}

std::string RecordingMllm::do_complete(const MllmRequest& request) {
  std::string text = upstream_->complete(request);
  store_.store(request_hash(request), text);
  return text;
}

CachingMllm::CachingMllm(std::shared_ptr<MllmBackend> delegate, std::filesystem::path cache_dir)
    : delegate_(std::move(delegate)), store_(std::move(cache_dir)) {
  if (!delegate_) throw_invalid_argument("cache_wrap needs a backend");
  std::error_code ec;
  std::filesystem::create_directories(store_.dir(), ec);
  if (ec || !std::filesystem::is_directory(store_.dir())) {
    throw Error(ErrorKind::configuration, "cache directory is not writable: " + store_.dir().string());
  }
}

BackendDescriptor CachingMllm::descriptor() const {
  BackendDescriptor d = delegate_->descriptor();
  d.name = "cache(" + d.name + ")";
  d.config["cache_dir"] = store_.dir().string();
  return d;
}

std::string CachingMllm::do_complete(const MllmRequest& request) {
  const std::string hash = request_hash(request);
  try {
    if (auto cached = store_.load(hash)) {
      ++hits_;
      return *cached;
    }
  } catch (const Error& e) {
    spdlog::warn("cache entry {} unreadable, treating as miss: {}", hash, e.message());
  }
  ++misses_;
  std::string text = delegate_->complete(request);
  try {
    store_.store(hash, text);
  } catch (const Error& e) {
    spdlog::warn("cache write for {} failed: {}", hash, e.message());
  }
  return text;
}

std::shared_ptr<MllmBackend> cache_wrap(std::shared_ptr<MllmBackend> backend,
                                        const std::filesystem::path& cache_dir) {
  return std::make_shared<CachingMllm>(std::move(backend), cache_dir);
}

}  // namespace thinkfirst
