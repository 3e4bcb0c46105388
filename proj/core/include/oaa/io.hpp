#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "oaa/region.hpp"
#include "oaa/tensor.hpp"

namespace oaa {

/// Decodes a PNG as 8-bit RGB; byte v maps to v / 255.
ImageTensor read_png_rgb(const std::filesystem::path& path);

/// Encodes as 8-bit RGB; value r maps to round(r * 255) clamped to [0, 255].
void write_png_rgb(const std::filesystem::path& path, const ImageTensor& image);

/// Decodes a PNG as 8-bit grayscale; gray >= 128 counts as salient.
RegionMask read_saliency_png(const std::filesystem::path& path);

/// Writes a mask as 8-bit grayscale, 255 for set pixels and 0 elsewhere.
void write_mask_png(const std::filesystem::path& path, const RegionMask& mask);

/// Parses a JSON array of {"label","confidence","left","top","right","bottom"}.
/// Fields are checked for type and sign; geometry against an image happens in
/// validate_box.
std::vector<DetectionBox> parse_boxes_json(std::string_view text);
std::vector<DetectionBox> read_boxes_json(const std::filesystem::path& path);
void write_boxes_json(const std::filesystem::path& path, const std::vector<DetectionBox>& boxes);

}  // namespace oaa
