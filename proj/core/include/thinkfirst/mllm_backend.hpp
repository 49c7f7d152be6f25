// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "thinkfirst/image.hpp"

namespace thinkfirst {

enum class BackendKind { mllm, segmenter };

struct BackendDescriptor {
  std::string name;
  BackendKind kind = BackendKind::mllm;
  bool concurrency_safe = true;
  std::map<std::string, std::string> config;
};

struct TextPart {
  std::string text;
};
struct ImagePart {
  ImageRef image;
};
using PromptPart = std::variant<TextPart, ImagePart>;

struct MllmRequest {
  std::string system_context;
  std::vector<PromptPart> parts;
  double temperature = 0.5;
  int max_output_tokens = 2000;

  // Exactly one image part and at least one text part.
  void validate() const;
  const ImageRef& image() const;
};

// Canonical byte serialization hashed by request_hash():
//
//   "thinkfirst-mllm-request/v1\n"
//   "temperature:" <%.6f> "\n"
//   "max_output_tokens:" <decimal> "\n"
//   "system:" <byte length> ":" <utf-8 bytes> "\n"
//   per part, in order:
//     "text:" <byte length> ":" <utf-8 bytes> "\n"
//     "image:" <png|jpeg> ":" <byte length> ":" <payload bytes> "\n"
std::vector<std::uint8_t> canonical_request_bytes(const MllmRequest& request);

// Lowercase hex SHA-256 of canonical_request_bytes().
std::string request_hash(const MllmRequest& request);

class MllmBackend {
 public:
  virtual ~MllmBackend() = default;

  // Validates the request, then delegates to do_complete().
  std::string complete(const MllmRequest& request);

  virtual BackendDescriptor descriptor() const = 0;
  // Cheap reachability check for health reporting.
  virtual bool probe() const { return true; }

 protected:
  virtual std::string do_complete(const MllmRequest& request) = 0;
};

// `<dir>/<request_hash>.txt` files holding raw model output.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path path_for(const std::string& hash) const { return dir_ / (hash + ".txt"); }

  // nullopt when the file does not exist; throws Error(load) if it exists
  // but cannot be read.
  std::optional<std::string> load(const std::string& hash) const;
  // Writes through a unique temporary file and renames it into place, so
  // concurrent writers of one key leave exactly one complete file.
  void store(const std::string& hash, const std::string& text) const;

 private:
  std::filesystem::path dir_;
};

// Serves fixtures keyed by request hash. A miss is Error(fixture_missing)
// naming the hash.
class ReplayMllm final : public MllmBackend {
 public:
  explicit ReplayMllm(std::filesystem::path fixture_dir, std::string name = "replay");

  BackendDescriptor descriptor() const override;
  bool probe() const override;

 protected:
  std::string do_complete(const MllmRequest& request) override;

 private:
  FixtureStore store_;
  std::string name_;
};

// Forwards to `upstream` and stores every response as a fixture.
class RecordingMllm final : public MllmBackend {
 public:
  RecordingMllm(std::shared_ptr<MllmBackend> upstream, std::filesystem::path fixture_dir);

  BackendDescriptor descriptor() const override;
  bool probe() const override { return upstream_->probe(); }

 protected:
  std::string do_complete(const MllmRequest& request) override;

 private:
  std::shared_ptr<MllmBackend> upstream_;
  FixtureStore store_;
};

// Read-through/write-through cache in front of another backend.
class CachingMllm final : public MllmBackend {
 public:
  CachingMllm(std::shared_ptr<MllmBackend> delegate, std::filesystem::path cache_dir);

  BackendDescriptor descriptor() const override;
  bool probe() const override { return delegate_->probe(); }

  std::size_t hits() const noexcept { return hits_.load(); }
  std::size_t misses() const noexcept { return misses_.load(); }

 protected:
  std::string do_complete(const MllmRequest& request) override;

 private:
  std::shared_ptr<MllmBackend> delegate_;
  FixtureStore store_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

std::shared_ptr<MllmBackend> cache_wrap(std::shared_ptr<MllmBackend> backend,
                                        const std::filesystem::path& cache_dir);

// OpenAI-compatible chat-completions client.
struct RemoteMllmConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string api_key;
  int timeout_seconds = 120;

  // Reads the key from THINKFIRST_MLLM_KEY; throws Error(configuration) if unset.
  static RemoteMllmConfig from_env();
};

class RemoteMllm final : public MllmBackend {
 public:
  explicit RemoteMllm(RemoteMllmConfig config);

  BackendDescriptor descriptor() const override;
  bool probe() const override { return !config_.api_key.empty(); }

  // Request body sent to the provider; exposed for tests.
  std::string build_body(const MllmRequest& request) const;
  // Extracts the completion text from a provider response body.
  static std::string extract_text(const std::string& response_body);

 protected:
  std::string do_complete(const MllmRequest& request) override;

 private:
  RemoteMllmConfig config_;
};

}  // namespace thinkfirst
