// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thinkfirst/cot_orchestrator.hpp"
#include "thinkfirst/mllm_backend.hpp"
#include "thinkfirst/pipeline.hpp"
#include "thinkfirst/prompt_engine.hpp"
#include "thinkfirst/segmenter_backend.hpp"

namespace thinkfirst {

enum class MllmChoice { remote, replay, record };
enum class SegmenterChoice { lisa, keyword_mock };

std::string_view to_string(MllmChoice c) noexcept;
std::string_view to_string(SegmenterChoice c) noexcept;
MllmChoice parse_mllm_choice(std::string_view text);
SegmenterChoice parse_segmenter_choice(std::string_view text);

// Shared by the command line tool and the service. JSON file layout:
//
//   {
//     "mllm": "replay",                    // remote | replay | record
//     "segmenter": "keyword-mock",         // lisa | keyword-mock
//     "fixture_dir": "fixtures",           // replay / record
//     "cache_dir": null,
//     "prompt_dir": null,                  // default template directory
//     "transcript_dir": null,
//     "remote": {"base_url": "...", "path": "...", "model": "gpt-4o", "timeout_seconds": 120},
//     "lisa": {"command": ["python3", "lisa_bridge.py"], "timeout_seconds": 600},
//     "keyword_rules": [{"triggers": ["flatfish"], "box": [x0, y0, x1, y1]},
//                       {"triggers": ["chair"], "mask": "chair_mask.png"}],
//     "retry": {"max_attempts": 2, "on_failure": "raise"},   // or "degrade"
//     "sampling": {"temperature": 0.5, "max_output_tokens": 2000},
//     "host": "127.0.0.1", "port": 8080, "max_upload_bytes": 10485760
//   }
//
// Relative paths resolve against the file's directory. The API key is only
// ever read from THINKFIRST_MLLM_KEY.
struct ToolkitConfig {
  MllmChoice mllm = MllmChoice::replay;
  SegmenterChoice segmenter = SegmenterChoice::keyword_mock;
  std::optional<std::filesystem::path> fixture_dir;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> prompt_dir;
  std::optional<std::filesystem::path> transcript_dir;
  RemoteMllmConfig remote;
  std::vector<std::string> lisa_command;
  int lisa_timeout_seconds = 600;
  std::vector<KeywordRule> keyword_rules;
  RetryPolicy retry;
  SamplingParams sampling;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_upload_bytes = 10u * 1024u * 1024u;

  static ToolkitConfig from_json(std::string_view text, const std::filesystem::path& base_dir);
  static ToolkitConfig load(const std::filesystem::path& path);

  // replay and record need fixture_dir; remote and record need
  // THINKFIRST_MLLM_KEY; lisa needs a command. Throws Error(configuration).
  void validate() const;
};

Backends build_backends(const ToolkitConfig& config);
PromptLibrary load_prompts(const ToolkitConfig& config);
PipelineOptions pipeline_options(const ToolkitConfig& config);

}  // namespace thinkfirst
