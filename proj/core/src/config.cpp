// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/config.hpp"

#include <cstdlib>

#include <json.hpp>

#include "thinkfirst/error.hpp"

namespace thinkfirst {

std::string_view to_string(MllmChoice c) noexcept {
  switch (c) {
    case MllmChoice::remote: return "remote";
    case MllmChoice::replay: return "replay";
    case MllmChoice::record: return "record";
  }
  return "replay";
}

std::string_view to_string(SegmenterChoice c) noexcept {
  return c == SegmenterChoice::lisa ? "lisa" : "keyword-mock";
}

MllmChoice parse_mllm_choice(std::string_view text) {
  if (text == "remote") return MllmChoice::remote;
  if (text == "replay") return MllmChoice::replay;
  if (text == "record") return MllmChoice::record;
  throw Error(ErrorKind::configuration, "unknown mllm backend '" + std::string(text) + "' (remote, replay, record)");
}

SegmenterChoice parse_segmenter_choice(std::string_view text) {
  if (text == "lisa") return SegmenterChoice::lisa;
  if (text == "keyword-mock" || text == "keyword_mock") return SegmenterChoice::keyword_mock;
  throw Error(ErrorKind::configuration, "unknown segmenter '" + std::string(text) + "' (lisa, keyword-mock)");
}

namespace {

using Json = nlohmann::json;

std::optional<std::filesystem::path> opt_path(const Json& doc, const char* key, const std::filesystem::path& base) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  std::filesystem::path p = doc.at(key).get<std::string>();
  return p.is_absolute() ? p : base / p;
}

KeywordRule parse_rule(const Json& j, const std::filesystem::path& base) {
  KeywordRule rule;
  rule.triggers = j.at("triggers").get<std::vector<std::string>>();
  if (rule.triggers.empty()) throw Error(ErrorKind::configuration, "keyword rule without triggers");
  if (j.contains("box")) {
    const auto b = j.at("box").get<std::vector<int>>();
    if (b.size() != 4) throw Error(ErrorKind::configuration, "keyword rule box needs [x0, y0, x1, y1]");
    rule.region = PixelBox{b[0], b[1], b[2], b[3]};
  } else if (j.contains("mask")) {
    std::filesystem::path p = j.at("mask").get<std::string>();
    rule.region = read_mask(p.is_absolute() ? p : base / p);
  } else {
    throw Error(ErrorKind::configuration, "keyword rule needs a box or a mask");
  }
  return rule;
}

}  // namespace

ToolkitConfig ToolkitConfig::from_json(std::string_view text, const std::filesystem::path& base_dir) {
  ToolkitConfig c;
  try {
    const Json doc = Json::parse(text);
    if (!doc.is_object()) throw Error(ErrorKind::configuration, "config must be a JSON object");
    if (doc.contains("mllm")) c.mllm = parse_mllm_choice(doc.at("mllm").get<std::string>());
    if (doc.contains("segmenter")) c.segmenter = parse_segmenter_choice(doc.at("segmenter").get<std::string>());
    c.fixture_dir = opt_path(doc, "fixture_dir", base_dir);
    c.cache_dir = opt_path(doc, "cache_dir", base_dir);
    c.prompt_dir = opt_path(doc, "prompt_dir", base_dir);
    c.transcript_dir = opt_path(doc, "transcript_dir", base_dir);
    if (doc.contains("remote")) {
      const Json& r = doc.at("remote");
      c.remote.base_url = r.value("base_url", c.remote.base_url);
      c.remote.path = r.value("path", c.remote.path);
      c.remote.model = r.value("model", c.remote.model);
      c.remote.timeout_seconds = r.value("timeout_seconds", c.remote.timeout_seconds);
    }
    if (doc.contains("lisa")) {
      const Json& l = doc.at("lisa");
      c.lisa_command = l.value("command", std::vector<std::string>{});
      c.lisa_timeout_seconds = l.value("timeout_seconds", c.lisa_timeout_seconds);
    }
    if (doc.contains("keyword_rules")) {
      for (const auto& j : doc.at("keyword_rules")) c.keyword_rules.push_back(parse_rule(j, base_dir));
    }
    if (doc.contains("retry")) {
      const Json& r = doc.at("retry");
      c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      const std::string on = r.value("on_failure", std::string("raise"));
      if (on == "raise") {
        c.retry.on_failure = OnFailure::raise;
      } else if (on == "degrade" || on == "return_degraded") {
        c.retry.on_failure = OnFailure::return_degraded;
      } else {
        throw Error(ErrorKind::configuration, "retry.on_failure must be raise or degrade");
      }
    }
    if (doc.contains("sampling")) {
      const Json& s = doc.at("sampling");
      c.sampling.temperature = s.value("temperature", c.sampling.temperature);
      c.sampling.max_output_tokens = s.value("max_output_tokens", c.sampling.max_output_tokens);
    }
    c.host = doc.value("host", c.host);
    c.port = doc.value("port", c.port);
    c.max_upload_bytes = doc.value("max_upload_bytes", c.max_upload_bytes);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::configuration, std::string("malformed config: ") + e.what());
  }
  return c;
}

ToolkitConfig ToolkitConfig::load(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::configuration, "cannot read config: " + e.message());
  }
  return from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                   std::filesystem::absolute(path).parent_path());
}

void ToolkitConfig::validate() const {
  if ((mllm == MllmChoice::replay || mllm == MllmChoice::record) && !fixture_dir) {
    throw Error(ErrorKind::configuration, std::string(to_string(mllm)) + " backend needs a fixture directory");
  }
  if (mllm != MllmChoice::replay) (void)RemoteMllmConfig::from_env();
  if (segmenter == SegmenterChoice::lisa && lisa_command.empty()) {
    throw Error(ErrorKind::configuration, "lisa segmenter needs a command");
  }
  if (port < 0 || port > 65535) throw Error(ErrorKind::configuration, "port out of range");
  retry.validate();
}

Backends build_backends(const ToolkitConfig& config) {
  config.validate();
  Backends b;
  switch (config.mllm) {
    case MllmChoice::replay:
      b.mllm = std::make_shared<ReplayMllm>(*config.fixture_dir);
      break;
    case MllmChoice::remote:
    case MllmChoice::record: {
      RemoteMllmConfig remote = config.remote;
      remote.api_key = RemoteMllmConfig::from_env().api_key;
      std::shared_ptr<MllmBackend> live = std::make_shared<RemoteMllm>(std::move(remote));
      if (config.mllm == MllmChoice::record) live = std::make_shared<RecordingMllm>(live, *config.fixture_dir);
      b.mllm = std::move(live);
      break;
    }
  }
  if (config.cache_dir) b.mllm = cache_wrap(b.mllm, *config.cache_dir);

  if (config.segmenter == SegmenterChoice::lisa) {
    SubprocessSegmenter::Options opts;
    opts.command = config.lisa_command;
    opts.response_timeout_seconds = config.lisa_timeout_seconds;
    b.segmenter = std::make_shared<SubprocessSegmenter>(std::move(opts));
  } else {
    b.segmenter = std::make_shared<KeywordMockSegmenter>(config.keyword_rules);
  }
  return b;
}

PromptLibrary load_prompts(const ToolkitConfig& config) {
  return config.prompt_dir ? PromptLibrary::load(*config.prompt_dir) : PromptLibrary::load_default();
}

PipelineOptions pipeline_options(const ToolkitConfig& config) {
  PipelineOptions o;
  o.retry = config.retry;
  o.sampling = config.sampling;
  o.transcript_dir = config.transcript_dir;
  return o;
}

}  // namespace thinkfirst
