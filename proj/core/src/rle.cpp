// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/rle.hpp"

#include "thinkfirst/error.hpp"

namespace thinkfirst {

std::vector<MaskRun> rle_encode(const BinaryMask& mask) {
  std::vector<MaskRun> runs;
  const auto cells = mask.cells();
  if (cells.empty()) return runs;
  MaskRun current{cells[0] != 0, 0};
  for (std::uint8_t c : cells) {
    const bool v = c != 0;
    if (v != current.value) {
      runs.push_back(current);
      current = {v, 0};
    }
    ++current.length;
  }
  runs.push_back(current);
  return runs;
}

BinaryMask rle_decode(std::span<const MaskRun> runs, int width, int height) {
  BinaryMask probe(width, height);
  const std::size_t total = probe.size();
  std::vector<std::uint8_t> cells;
  cells.reserve(total);
  for (const MaskRun& run : runs) {
    if (run.length == 0) throw_invalid_argument("RLE run of length zero");
    if (cells.size() + run.length > total) throw_invalid_argument("RLE runs exceed width*height");
    cells.insert(cells.end(), run.length, run.value ? 1 : 0);
  }
  if (cells.size() != total) throw_invalid_argument("RLE runs cover fewer than width*height cells");
  return BinaryMask(width, height, std::move(cells));
}

}  // namespace thinkfirst
