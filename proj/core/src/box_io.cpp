#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oaa/errors.hpp"
#include "oaa/io.hpp"

namespace oaa {

namespace {

std::size_t pixel_index(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw IoError(std::string("box field '") + key + "' missing or not an integer");
  }
  const auto value = it->get<std::int64_t>();
  if (value < 0) throw BoundsError(std::string("box field '") + key + "' is negative");
  return static_cast<std::size_t>(value);
}

}  // namespace

std::vector<DetectionBox> parse_boxes_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("box file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw IoError("box file must hold a JSON array");

  std::vector<DetectionBox> boxes;
  boxes.reserve(doc.size());
  for (const auto& obj : doc) {
    if (!obj.is_object()) throw IoError("box entries must be objects");
    DetectionBox box;
    if (auto it = obj.find("label"); it != obj.end() && it->is_string()) {
      box.label = it->get<std::string>();
    } else {
      throw IoError("box field 'label' missing or not a string");
    }
    if (auto it = obj.find("confidence"); it != obj.end() && it->is_number()) {
      box.confidence = it->get<double>();
    } else {
      throw IoError("box field 'confidence' missing or not a number");
    }
    box.left = pixel_index(obj, "left");
    box.top = pixel_index(obj, "top");
    box.right = pixel_index(obj, "right");
    box.bottom = pixel_index(obj, "bottom");
    boxes.push_back(std::move(box));
  }
  return boxes;
}

std::vector<DetectionBox> read_boxes_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open box file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_boxes_json(text.str());
}

void write_boxes_json(const std::filesystem::path& path, const std::vector<DetectionBox>& boxes) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& b : boxes) {
    doc.push_back({{"label", b.label},
                   {"confidence", b.confidence},
                   {"left", b.left},
                   {"top", b.top},
                   {"right", b.right},
                   {"bottom", b.bottom}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write box file " + path.string());
  out << doc.dump() << '\n';
}

}  // namespace oaa
