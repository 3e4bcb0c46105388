#include <cmath>
#include <random>

#include <json.hpp>

#include "oaa/errors.hpp"
#include "oaa/process_oracle.hpp"

namespace oaa {

bool ConformanceReport::passed() const {
  if (checks.empty()) return false;
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

namespace {

using nlohmann::json;

struct Transcript {
  ChildProcess& child;
  std::chrono::milliseconds timeout;
  ConformanceReport& report;

  void record(std::string name, bool ok, std::string detail = {}) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  }

  // Sends a line and parses the reply, logging a failed check on any
  // transport or JSON error.
  std::optional<json> exchange(const std::string& name, const std::string& line) {
    try {
      child.write_line(line);
      auto reply = child.read_line(timeout);
      if (!reply) {
        record(name, false, "server closed its output");
        return std::nullopt;
      }
      auto doc = json::parse(*reply, nullptr, false);
      if (doc.is_discarded() || !doc.is_object()) {
        record(name, false, "reply is not a JSON object");
        return std::nullopt;
      }
      return doc;
    } catch (const OracleFailure& e) {
      record(name, false, e.what());
      return std::nullopt;
    }
  }
};

ImageTensor filled(const Shape& shape, double value) {
  return ImageTensor(shape, std::vector<double>(shape.size(), value));
}

ImageTensor seeded_random(const Shape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> data(shape.size());
  for (double& v : data) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return ImageTensor(shape, std::move(data));
}

}  // namespace

ConformanceReport run_conformance(const std::string& command, std::chrono::milliseconds timeout) {
  ConformanceReport report;
  std::optional<ChildProcess> child;
  try {
    child.emplace(command);
  } catch (const OracleFailure& e) {
    report.checks.push_back({"spawn", false, e.what()});
    return report;
  }
  Transcript t{*child, timeout, report};

  auto meta = t.exchange("handshake", R"({"type":"meta"})");
  if (!meta) return report;

  auto positive = [&](const char* key) -> std::size_t {
    const auto it = meta->find(key);
    if (it == meta->end() || !it->is_number_integer() || it->get<std::int64_t>() <= 0) return 0;
    return static_cast<std::size_t>(it->get<std::int64_t>());
  };
  const bool type_ok = meta->value("type", std::string{}) == "meta";
  const std::size_t classes = positive("num_classes");
  const Shape shape{positive("height"), positive("width"), positive("channels")};
  const bool meta_ok = type_ok && classes >= 2 && shape.height > 0 && shape.width > 0 &&
                       shape.channels == 3;
  t.record("handshake", meta_ok,
           meta_ok ? "num_classes=" + std::to_string(classes) + " shape=" +
                         std::to_string(shape.height) + "x" + std::to_string(shape.width) + "x3"
                   : "bad meta reply: " + meta->dump());
  if (!meta_ok) return report;

  const std::vector<std::pair<std::string, ImageTensor>> images = {
      {"zeros", filled(shape, 0.0)},          {"ones", filled(shape, 1.0)},
      {"gray", filled(shape, 0.5)},           {"random-1", seeded_random(shape, 1)},
      {"random-2", seeded_random(shape, 2)},  {"zeros-repeat", filled(shape, 0.0)},
  };

  std::uint64_t id = 1000;
  std::optional<std::vector<double>> first_zero;
  for (const auto& [name, image] : images) {
    const std::string check = "classify:" + name;
    const json query = {{"type", "classify"}, {"id", id}, {"pixels", wire::encode_pixels(image)}};
    auto reply = t.exchange(check, query.dump());
    if (!reply) return report;

    std::string problem;
    std::vector<double> values;
    if (reply->value("type", std::string{}) != "probs") {
      problem = "reply type is not 'probs'";
    } else if (!reply->contains("id") || !(*reply)["id"].is_number_unsigned() ||
               (*reply)["id"].get<std::uint64_t>() != id) {
      problem = "id not echoed";
    } else if (!reply->contains("values") || !(*reply)["values"].is_array() ||
               (*reply)["values"].size() != classes) {
      problem = "expected " + std::to_string(classes) + " values";
    } else {
      for (const auto& v : (*reply)["values"]) {
        if (!v.is_number()) {
          problem = "non-numeric value";
          break;
        }
        values.push_back(v.get<double>());
      }
      if (problem.empty()) {
        try {
          ProbabilityVector probs(values);
        } catch (const OracleFailure& e) {
          problem = e.what();
        }
      }
    }
    if (problem.empty() && name == "zeros") first_zero = values;
    if (problem.empty() && name == "zeros-repeat" && first_zero && *first_zero != values) {
      problem = "repeated query returned a different vector";
    }
    t.record(check, problem.empty(), problem);
    ++id;
  }
  return report;
}

}  // namespace oaa
