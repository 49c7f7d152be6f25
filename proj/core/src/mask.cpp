// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/mask.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "thinkfirst/error.hpp"
#include "thinkfirst/image.hpp"

namespace thinkfirst {

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw_invalid_argument("mask dimensions must be positive");
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
  if (width < 1 || height < 1) throw_invalid_argument("mask dimensions must be positive");
  if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw_invalid_argument("mask cell count does not match width*height");
  }
  for (auto& c : cells_) c = c ? 1 : 0;
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask) {
  std::vector<std::uint8_t> gray(mask.cells().begin(), mask.cells().end());
  for (auto& g : gray) g = g ? 255 : 0;

  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(mask.width());
  image.height = static_cast<png_uint_32>(mask.height());
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, gray.data(), 0, nullptr)) {
    throw Error(ErrorKind::invalid_argument, std::string("mask encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, gray.data(), 0, nullptr)) {
    throw Error(ErrorKind::invalid_argument, std::string("mask encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw_invalid_argument(std::string("undecodable mask PNG: ") + image.message);
  }
  image.format &= ~(PNG_FORMAT_FLAG_LINEAR | PNG_FORMAT_FLAG_COLORMAP);
  const int channels = static_cast<int>(PNG_IMAGE_SAMPLE_CHANNELS(image.format));
  const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  const bool alpha_first = has_alpha && (image.format & PNG_FORMAT_FLAG_AFIRST) != 0;
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);

  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw_invalid_argument("undecodable mask PNG: " + msg);
  }

  const int first_color = alpha_first ? 1 : 0;
  const int color_channels = has_alpha ? channels - 1 : channels;
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(width) * height, 0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::uint8_t* px = buffer.data() + i * channels + first_color;
    for (int c = 0; c < color_channels; ++c) {
      if (px[c] != 0) {
        cells[i] = 1;
        break;
      }
    }
  }
  return BinaryMask(width, height, std::move(cells));
}

BinaryMask read_mask(const std::filesystem::path& path) {
  return decode_mask_png(read_file_bytes(path));
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  write_file_bytes(path, encode_mask_png(mask));
}

BinaryMask rasterize_polygons(std::span<const std::vector<PointF>> polygons, int width, int height) {
  BinaryMask mask(width, height);
  std::vector<double> crossings;
  for (const auto& poly : polygons) {
    if (poly.size() < 3) continue;
    for (int y = 0; y < height; ++y) {
      const double sy = y + 0.5;
      crossings.clear();
      for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const PointF& a = poly[i];
        const PointF& b = poly[j];
        // Half-open rule so a vertex on the scanline is counted once.
        if ((a.y > sy) != (b.y > sy)) {
          crossings.push_back(a.x + (sy - a.y) * (b.x - a.x) / (b.y - a.y));
        }
      }
      std::sort(crossings.begin(), crossings.end());
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        // Pixel centres in [x_in, x_out).
        const double x_in = crossings[k];
        const double x_out = crossings[k + 1];
        int x0 = static_cast<int>(std::ceil(x_in - 0.5));
        int x1 = static_cast<int>(std::ceil(x_out - 0.5)) - 1;
        x0 = std::max(x0, 0);
        x1 = std::min(x1, width - 1);
        for (int x = x0; x <= x1; ++x) mask.set(x, y);
      }
    }
  }
  return mask;
}

}  // namespace thinkfirst
