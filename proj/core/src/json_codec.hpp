// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "thinkfirst/pipeline.hpp"
#include "thinkfirst/rle.hpp"

namespace thinkfirst::detail {

using Json = nlohmann::ordered_json;

Json cot_to_json(const CotResult& cot);
Json rle_to_json(const BinaryMask& mask);
// Everything except the mask cells.
Json outcome_to_json(const SegmentationOutcome& outcome, bool include_timings);

}  // namespace thinkfirst::detail
