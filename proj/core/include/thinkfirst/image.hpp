// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace thinkfirst {

enum class ImageFormat { png, jpeg };

std::string_view to_string(ImageFormat format) noexcept;
std::string_view file_extension(ImageFormat format) noexcept;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Decoded 8-bit RGB pixels, row-major.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, Rgb fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<const std::uint8_t> data() const noexcept { return pixels_; }
  std::span<std::uint8_t> data() noexcept { return pixels_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// An encoded image (PNG or JPEG) whose dimensions were verified by decoding
// it once at construction. Copies share the payload.
class ImageRef {
 public:
  static ImageRef from_bytes(std::vector<std::uint8_t> bytes);
  static ImageRef from_file(const std::filesystem::path& path);
  // Encodes as PNG.
  static ImageRef from_raster(const Raster& raster);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  ImageFormat format() const noexcept { return format_; }
  std::span<const std::uint8_t> bytes() const noexcept { return *bytes_; }

  Raster decode() const;

  friend bool operator==(const ImageRef& a, const ImageRef& b) {
    return a.format_ == b.format_ && a.width_ == b.width_ && a.height_ == b.height_ &&
           (a.bytes_ == b.bytes_ || *a.bytes_ == *b.bytes_);
  }

 private:
  ImageRef() = default;

  std::shared_ptr<const std::vector<std::uint8_t>> bytes_;
  int width_ = 0;
  int height_ = 0;
  ImageFormat format_ = ImageFormat::png;
};

// Throws Error(invalid_argument) when the payload is neither PNG nor JPEG.
ImageFormat sniff_format(std::span<const std::uint8_t> bytes);
Raster decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Raster& raster);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace thinkfirst
