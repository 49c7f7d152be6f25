// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "thinkfirst/mask.hpp"

namespace thinkfirst {

// Row-major run-length encoding used on the wire. The first run carries the
// value of cell (0,0); the encoder never emits zero-length runs or two
// adjacent runs with the same value.
struct MaskRun {
  bool value = false;
  std::uint32_t length = 0;
  friend bool operator==(const MaskRun&, const MaskRun&) = default;
};

std::vector<MaskRun> rle_encode(const BinaryMask& mask);

// Throws Error(invalid_argument) if a run has zero length or the runs do not
// cover exactly width*height cells.
BinaryMask rle_decode(std::span<const MaskRun> runs, int width, int height);

}  // namespace thinkfirst
