// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "thinkfirst/pipeline.hpp"

namespace thinkfirst {

// outcome.json: id, flow, mode, prompts, request hash, CoT, timings and a
// reference to the mask file. With include_timings=false the document is
// byte-identical across replay runs.
std::string outcome_json(const SegmentationOutcome& outcome, bool include_timings = true);

// One directory per run: outcome.json, transcript.txt (raw MLLM output,
// only when an MLLM call was made) and mask.png.
void write_session_log(const std::filesystem::path& dir, const SegmentationOutcome& outcome,
                       bool include_timings = true);

}  // namespace thinkfirst
