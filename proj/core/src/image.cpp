// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/image.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "thinkfirst/error.hpp"

namespace thinkfirst {

std::string_view to_string(ImageFormat format) noexcept {
  return format == ImageFormat::png ? "png" : "jpeg";
}

std::string_view file_extension(ImageFormat format) noexcept {
  return format == ImageFormat::png ? ".png" : ".jpg";
}

Raster::Raster(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw_invalid_argument("raster dimensions must be positive");
  pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

Rgb Raster::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void Raster::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  pixels_[i] = c.r;
  pixels_[i + 1] = c.g;
  pixels_[i + 2] = c.b;
}

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPng[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= sizeof(kPng) && std::memcmp(bytes.data(), kPng, sizeof(kPng)) == 0) {
    return ImageFormat::png;
  }
  if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff) {
    return ImageFormat::jpeg;
  }
  throw_invalid_argument("unrecognized image payload (expected PNG or JPEG)");
}

namespace {

Raster decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw_invalid_argument(std::string("undecodable PNG: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  if (image.width < 1 || image.height < 1) {
    png_image_free(&image);
    throw_invalid_argument("PNG has zero dimension");
  }
  Raster raster(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, raster.data().data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw_invalid_argument("undecodable PNG: " + msg);
  }
  return raster;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Decodes into `out` (already sized by the caller once dimensions are known
// via the callback). Returns false and fills `message` on failure.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& out,
                     int& width, int& height, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    std::memcpy(message, err.message, sizeof(err.message));
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  out.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

Raster decode_jpeg(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> pixels;
  int width = 0;
  int height = 0;
  char message[JMSG_LENGTH_MAX] = {};
  if (!decode_jpeg_raw(bytes, pixels, width, height, message)) {
    throw_invalid_argument(std::string("undecodable JPEG: ") + message);
  }
  Raster raster(width, height);
  std::memcpy(raster.data().data(), pixels.data(), pixels.size());
  return raster;
}

}  // namespace

Raster decode_image(std::span<const std::uint8_t> bytes) {
  return sniff_format(bytes) == ImageFormat::png ? decode_png(bytes) : decode_jpeg(bytes);
}

std::vector<std::uint8_t> encode_png(const Raster& raster) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width());
  image.height = static_cast<png_uint_32>(raster.height());
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raster.data().data(), 0, nullptr)) {
    throw Error(ErrorKind::invalid_argument, std::string("PNG encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.data().data(), 0, nullptr)) {
    throw Error(ErrorKind::invalid_argument, std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

ImageRef ImageRef::from_bytes(std::vector<std::uint8_t> bytes) {
  ImageRef ref;
  ref.format_ = sniff_format(bytes);
  const Raster raster = decode_image(bytes);
  ref.width_ = raster.width();
  ref.height_ = raster.height();
  ref.bytes_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes));
  return ref;
}

ImageRef ImageRef::from_file(const std::filesystem::path& path) {
  return from_bytes(read_file_bytes(path));
}

ImageRef ImageRef::from_raster(const Raster& raster) {
  ImageRef ref;
  ref.format_ = ImageFormat::png;
  ref.width_ = raster.width();
  ref.height_ = raster.height();
  ref.bytes_ = std::make_shared<const std::vector<std::uint8_t>>(encode_png(raster));
  return ref;
}

Raster ImageRef::decode() const { return decode_image(*bytes_); }

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::load, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::load, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::load, "short write to " + path.string());
}

}  // namespace thinkfirst
