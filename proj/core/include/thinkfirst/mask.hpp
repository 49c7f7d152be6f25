// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace thinkfirst {

// Per-pixel foreground grid, row-major, aligned to an image.
class BinaryMask {
 public:
  BinaryMask() = default;
  // All-background mask. Throws Error(invalid_argument) unless width, height >= 1.
  BinaryMask(int width, int height);
  BinaryMask(int width, int height, std::vector<std::uint8_t> cells);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return cells_.size(); }

  bool at(int x, int y) const { return cells_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { cells_[index(x, y)] = value ? 1 : 0; }

  // Foreground pixel count.
  std::size_t count() const noexcept;
  bool empty() const noexcept { return count() == 0; }
  bool same_shape(const BinaryMask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  // One byte per cell, 0 or 1.
  std::span<const std::uint8_t> cells() const noexcept { return cells_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> cells_;
};

// Mask exchange format: single-channel 8-bit PNG, 255 foreground, 0 background.
std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask);
// Any PNG; a pixel is foreground when any colour channel is nonzero.
BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes);

BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

struct PointF {
  double x = 0.0;
  double y = 0.0;
};

// Rasterizes each polygon with the even-odd rule, sampling pixel centres
// (x + 0.5, y + 0.5), and unions the results.
BinaryMask rasterize_polygons(std::span<const std::vector<PointF>> polygons, int width, int height);

}  // namespace thinkfirst
