#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "oaa/errors.hpp"
#include "oaa/io.hpp"

namespace oaa {

namespace {

struct PngImage {
  png_image image{};
  PngImage() { image.version = PNG_IMAGE_VERSION; }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> decode(const std::filesystem::path& path, png_uint_32 format,
                                 std::size_t& height, std::size_t& width) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + png.image.message);
  }
  png.image.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw IoError("cannot decode PNG " + path.string() + ": " + png.image.message);
  }
  height = png.image.height;
  width = png.image.width;
  return buffer;
}

void encode(const std::filesystem::path& path, png_uint_32 format, std::size_t height,
            std::size_t width, const std::vector<std::uint8_t>& bytes) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(width);
  png.image.height = static_cast<png_uint_32>(height);
  png.image.format = format;
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + png.image.message);
  }
}

}  // namespace

ImageTensor read_png_rgb(const std::filesystem::path& path) {
  std::size_t height = 0, width = 0;
  const auto bytes = decode(path, PNG_FORMAT_RGB, height, width);
  std::vector<double> data(bytes.size());
  std::transform(bytes.begin(), bytes.end(), data.begin(),
                 [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
  return ImageTensor({height, width, 3}, std::move(data));
}

void write_png_rgb(const std::filesystem::path& path, const ImageTensor& image) {
  if (image.shape().channels != 3) throw ShapeError("PNG output requires 3 channels");
  std::vector<std::uint8_t> bytes(image.shape().size());
  const auto data = image.data();
  std::transform(data.begin(), data.end(), bytes.begin(), [](double r) {
    return static_cast<std::uint8_t>(std::clamp(std::round(r * 255.0), 0.0, 255.0));
  });
  encode(path, PNG_FORMAT_RGB, image.shape().height, image.shape().width, bytes);
}

RegionMask read_saliency_png(const std::filesystem::path& path) {
  std::size_t height = 0, width = 0;
  const auto bytes = decode(path, PNG_FORMAT_GRAY, height, width);
  RegionMask mask(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) mask.set(y, x, bytes[y * width + x] >= 128);
  }
  return mask;
}

void write_mask_png(const std::filesystem::path& path, const RegionMask& mask) {
  std::vector<std::uint8_t> bytes(mask.height() * mask.width());
  for (std::size_t y = 0; y < mask.height(); ++y) {
    for (std::size_t x = 0; x < mask.width(); ++x) bytes[y * mask.width() + x] = mask.at(y, x) ? 255 : 0;
  }
  encode(path, PNG_FORMAT_GRAY, mask.height(), mask.width(), bytes);
}

}  // namespace oaa
