#include "oaa/harness.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "oaa/errors.hpp"
#include "oaa/io.hpp"
#include "oaa/process_oracle.hpp"

namespace oaa {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto pos = text.find('\n');
    std::string_view line = text.substr(0, pos);
    text = pos == std::string_view::npos ? std::string_view{} : text.substr(pos + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    fn(line, line_no);
  }
}

std::string string_field(const ordered_json& obj, const char* key, std::size_t line_no) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw IoError("line " + std::to_string(line_no) + ": '" + key + "' missing or not a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const ordered_json& obj, const char* key,
                                           std::size_t line_no) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw IoError("line " + std::to_string(line_no) + ": '" + key + "' is not a string");
  }
  return it->get<std::string>();
}

// Infinite PSNR is written as the string "inf"; NaN as null.
ordered_json real_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

double real_from_json(const ordered_json& v) {
  if (v.is_null()) return std::nan("");
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw IoError("unexpected real value '" + s + "'");
  }
  return v.get<double>();
}

}  // namespace

// ---- manifest -------------------------------------------------------------

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> entries;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    auto obj = ordered_json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw IoError("manifest line " + std::to_string(line_no) + " is not a JSON object");
    }
    ManifestEntry e;
    e.image_path = string_field(obj, "image", line_no);
    e.id = optional_string(obj, "id", line_no).value_or(e.image_path);
    const auto label = obj.find("label_id");
    if (label == obj.end() || !label->is_number_integer()) {
      throw IoError("manifest line " + std::to_string(line_no) + ": 'label_id' must be an integer");
    }
    e.label_id = label->get<std::int64_t>();
    e.label_name = string_field(obj, "label_name", line_no);
    e.boxes_path = optional_string(obj, "boxes", line_no);
    e.saliency_path = optional_string(obj, "saliency", line_no);
    entries.push_back(std::move(e));
  });
  return entries;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text(path));
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    ordered_json obj = {{"id", e.id},
                        {"image", e.image_path},
                        {"label_id", e.label_id},
                        {"label_name", e.label_name}};
    if (e.boxes_path) obj["boxes"] = *e.boxes_path;
    if (e.saliency_path) obj["saliency"] = *e.saliency_path;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  write_text(path, format_manifest(entries));
}

std::set<std::string> read_label_list(const std::filesystem::path& path) {
  std::set<std::string> labels;
  for_each_line(read_text(path), [&](std::string_view line, std::size_t) {
    const auto first = line.find_first_not_of(" \t");
    const auto last = line.find_last_not_of(" \t");
    labels.emplace(line.substr(first, last - first + 1));
  });
  return labels;
}

std::vector<ManifestEntry> filter_manifest(const std::vector<ManifestEntry>& entries,
                                           const std::set<std::string>& allowed) {
  std::vector<ManifestEntry> kept;
  for (const auto& e : entries) {
    if (allowed.contains(e.label_name)) kept.push_back(e);
  }
  return kept;
}

// ---- oracle spec ----------------------------------------------------------

OracleSpec OracleSpec::parse(std::string_view text) {
  OracleSpec spec;
  if (text.starts_with("exec:")) {
    spec.kind = Kind::kExec;
    spec.command = std::string(text.substr(5));
    if (spec.command.empty()) throw ConfigError("exec oracle needs a command");
    return spec;
  }
  if (text.starts_with("builtin:")) {
    const std::string rest(text.substr(8));
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw ConfigError("expected builtin:<seed>:<classes>");
    try {
      std::size_t used = 0;
      spec.seed = std::stoull(rest.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument("seed");
      const std::string classes = rest.substr(colon + 1);
      spec.classes = std::stoul(classes, &used);
      if (used != classes.size()) throw std::invalid_argument("classes");
    } catch (const std::logic_error&) {
      throw ConfigError("expected builtin:<seed>:<classes>, got '" + std::string(text) + "'");
    }
    if (spec.classes < 2) throw ConfigError("builtin oracle needs at least 2 classes");
    return spec;
  }
  throw ConfigError("oracle must be builtin:<seed>:<classes> or exec:<command>");
}

std::string OracleSpec::to_string() const {
  if (kind == Kind::kExec) return "exec:" + command;
  return "builtin:" + std::to_string(seed) + ":" + std::to_string(classes);
}

// ---- records --------------------------------------------------------------

std::string_view to_string(EntryStatus status) {
  switch (status) {
    case EntryStatus::kAttacked: return "attacked";
    case EntryStatus::kSkipped: return "skipped";
    case EntryStatus::kErrored: return "errored";
  }
  return "unknown";
}

RunRecord RecordLine::run_record() const {
  return {image_id, success, queries, l2, psnr, ssim};
}

std::string format_record(const RecordLine& r) {
  ordered_json obj = {{"image_id", r.image_id},
                      {"mode", r.mode},
                      {"status", to_string(r.status)},
                      {"seed", r.seed},
                      {"label_id", r.label_id}};
  obj["predicted"] = r.predicted ? ordered_json(*r.predicted) : ordered_json(nullptr);
  if (r.status == EntryStatus::kAttacked) {
    obj["success"] = r.success;
    obj["queries"] = r.queries;
    obj["iterations"] = r.iterations;
    obj["region_pixels"] = r.region_pixels;
    obj["l2"] = real_to_json(r.l2);
    obj["psnr"] = real_to_json(r.psnr);
    obj["ssim"] = r.ssim ? real_to_json(*r.ssim) : ordered_json(nullptr);
  } else {
    obj["reason"] = r.reason;
  }
  return obj.dump();
}

RecordLine parse_record(std::string_view line) {
  const auto obj = ordered_json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw IoError("record line is not a JSON object");
  try {
    RecordLine r;
    r.image_id = obj.at("image_id").get<std::string>();
    r.mode = obj.at("mode").get<std::string>();
    const auto status = obj.at("status").get<std::string>();
    if (status == "attacked") {
      r.status = EntryStatus::kAttacked;
    } else if (status == "skipped") {
      r.status = EntryStatus::kSkipped;
    } else if (status == "errored") {
      r.status = EntryStatus::kErrored;
    } else {
      throw IoError("unknown record status '" + status + "'");
    }
    r.seed = obj.at("seed").get<std::uint64_t>();
    r.label_id = obj.at("label_id").get<std::int64_t>();
    if (const auto& p = obj.at("predicted"); !p.is_null()) r.predicted = p.get<std::int64_t>();
    if (r.status == EntryStatus::kAttacked) {
      r.success = obj.at("success").get<bool>();
      r.queries = obj.at("queries").get<std::uint64_t>();
      r.iterations = obj.at("iterations").get<std::uint64_t>();
      r.region_pixels = obj.at("region_pixels").get<std::uint64_t>();
      r.l2 = real_from_json(obj.at("l2"));
      r.psnr = real_from_json(obj.at("psnr"));
      if (const auto& s = obj.at("ssim"); !s.is_null()) r.ssim = real_from_json(s);
    } else {
      r.reason = obj.value("reason", std::string{});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed record: ") + e.what());
  }
}

std::vector<RecordLine> read_records(const std::filesystem::path& path) {
  std::vector<RecordLine> records;
  for_each_line(read_text(path), [&](std::string_view line, std::size_t line_no) {
    try {
      records.push_back(parse_record(line));
    } catch (const IoError& e) {
      throw IoError("records line " + std::to_string(line_no) + ": " + e.what());
    }
  });
  return records;
}

std::string format_report(const std::vector<RecordLine>& records) {
  std::size_t attacked = 0, skipped = 0, errored = 0;
  std::vector<RunRecord> runs;
  std::set<std::string> modes;
  for (const auto& r : records) {
    modes.insert(r.mode);
    switch (r.status) {
      case EntryStatus::kAttacked:
        ++attacked;
        runs.push_back(r.run_record());
        break;
      case EntryStatus::kSkipped: ++skipped; break;
      case EntryStatus::kErrored: ++errored; break;
    }
  }

  ordered_json doc;
  doc["mode"] = modes.size() == 1 ? ordered_json(*modes.begin()) : ordered_json(nullptr);
  doc["entries"] = records.size();
  doc["attacked"] = attacked;
  doc["skipped"] = skipped;
  doc["errored"] = errored;
  doc["all_skipped"] = !records.empty() && skipped == records.size();
  doc["statistics_over"] = "successful_runs";
  if (runs.empty()) {
    doc["aggregate"] = nullptr;
  } else {
    const AggregateReport a = aggregate(runs);
    ordered_json agg;
    agg["successes"] = a.successes;
    agg["success_rate"] = real_to_json(a.success_rate);
    agg["average_queries"] = real_to_json(a.average_queries);
    agg["median_queries"] = real_to_json(a.median_queries);
    agg["average_l2"] = real_to_json(a.average_l2);
    agg["median_l2"] = real_to_json(a.median_l2);
    agg["average_psnr"] = real_to_json(a.average_psnr);
    agg["average_ssim"] = real_to_json(a.average_ssim);
    ordered_json bins = ordered_json::array();
    for (const auto& b : a.histogram) {
      bins.push_back({{"lower", b.lower},
                      {"upper", b.upper ? ordered_json(*b.upper) : ordered_json(nullptr)},
                      {"count", b.count}});
    }
    agg["histogram"] = std::move(bins);
    doc["aggregate"] = std::move(agg);
  }
  return doc.dump(2) + "\n";
}

// ---- batch ----------------------------------------------------------------

std::uint64_t entry_seed(std::uint64_t plan_seed, std::size_t index) {
  return plan_seed + static_cast<std::uint64_t>(index);
}

namespace {

// Oracle access for one worker. Builtin oracles are built per image shape;
// an exec oracle is one child process per worker.
class OracleSource {
 public:
  explicit OracleSource(const OracleSpec& spec) : spec_(spec) {}

  Oracle& for_shape(const Shape& shape) {
    if (spec_.kind == OracleSpec::Kind::kExec) {
      if (!process_) process_ = std::make_unique<ProcessOracle>(spec_.command);
      return *process_;
    }
    const auto key = std::make_tuple(shape.height, shape.width, shape.channels);
    auto& slot = builtin_[key];
    if (!slot) slot = make_builtin_oracle(spec_.seed, shape, spec_.classes);
    return *slot;
  }

  // A failed child cannot be trusted for the next entry.
  void reset_process() { process_.reset(); }

 private:
  OracleSpec spec_;
  std::unique_ptr<ProcessOracle> process_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::unique_ptr<LinearSoftmaxOracle>>
      builtin_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string safe_file_stem(const std::string& id) {
  std::string out;
  for (char ch : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_';
    out.push_back(ok ? ch : '_');
  }
  return out;
}

RecordLine attack_entry(const RunPlan& plan, const ManifestEntry& entry, std::size_t index,
                        OracleSource& oracles) {
  RecordLine rec;
  rec.image_id = entry.id;
  rec.mode = std::string(to_string(plan.attack.region.mode));
  rec.seed = entry_seed(plan.attack.seed, index);
  rec.label_id = entry.label_id;

  const ImageTensor original = read_png_rgb(resolve(plan.base_dir, entry.image_path));
  const Shape& shape = original.shape();
  Oracle& oracle = oracles.for_shape(shape);

  const std::size_t predicted = oracle.predict(original);
  rec.predicted = static_cast<std::int64_t>(predicted);
  if (entry.label_id < 0 || predicted != static_cast<std::size_t>(entry.label_id)) {
    rec.status = EntryStatus::kSkipped;
    rec.reason = "misclassified";
    return rec;
  }

  std::vector<DetectionBox> boxes;
  if (entry.boxes_path) boxes = read_boxes_json(resolve(plan.base_dir, *entry.boxes_path));
  RegionMask saliency(shape.height, shape.width);
  if (entry.saliency_path) saliency = read_saliency_png(resolve(plan.base_dir, *entry.saliency_path));

  const RegionMask region = combine(boxes, saliency, plan.attack.region, shape.height, shape.width);
  const CoordinateSet coords = mask_to_coordinates(region, shape.channels, rec.seed);

  AttackConfig cfg = plan.attack;
  cfg.seed = rec.seed;
  const AttackResult result = run_attack(original, oracle, coords, cfg, predicted);

  rec.status = EntryStatus::kAttacked;
  rec.success = result.success;
  rec.queries = result.queries;
  rec.iterations = result.iterations;
  rec.region_pixels = region.count();
  rec.l2 = result.l2;
  rec.psnr = psnr(original, result.adversarial);
  if (shape.height >= SsimParams{}.window && shape.width >= SsimParams{}.window) {
    rec.ssim = ssim(original, result.adversarial);
  }
  if (plan.save_adversarial) {
    const auto dir = plan.out_dir / "adversarial";
    std::filesystem::create_directories(dir);
    write_png_rgb(dir / (std::to_string(index) + "_" + safe_file_stem(entry.id) + ".png"),
                  result.adversarial);
  }
  return rec;
}

}  // namespace

BatchOutcome run_batch(const RunPlan& plan, const std::vector<ManifestEntry>& manifest) {
  plan.attack.validate();
  if (manifest.empty()) throw ConfigError("manifest is empty");
  std::filesystem::create_directories(plan.out_dir);

  BatchOutcome outcome;
  outcome.records.resize(manifest.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    OracleSource oracles(plan.oracle);
    for (std::size_t i = next++; i < manifest.size(); i = next++) {
      try {
        outcome.records[i] = attack_entry(plan, manifest[i], i, oracles);
      } catch (const std::exception& e) {
        if (dynamic_cast<const OracleFailure*>(&e)) oracles.reset_process();
        RecordLine rec;
        rec.image_id = manifest[i].id;
        rec.mode = std::string(to_string(plan.attack.region.mode));
        rec.seed = entry_seed(plan.attack.seed, i);
        rec.label_id = manifest[i].label_id;
        rec.status = EntryStatus::kErrored;
        rec.reason = e.what();
        outcome.records[i] = std::move(rec);
      }
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(plan.jobs, manifest.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::string lines;
  std::vector<RunRecord> runs;
  for (const auto& r : outcome.records) {
    lines += format_record(r);
    lines += '\n';
    switch (r.status) {
      case EntryStatus::kAttacked:
        ++outcome.attacked;
        runs.push_back(r.run_record());
        break;
      case EntryStatus::kSkipped: ++outcome.skipped; break;
      case EntryStatus::kErrored: ++outcome.errored; break;
    }
  }
  if (!runs.empty()) outcome.report = aggregate(runs);

  write_text(plan.out_dir / "records.jsonl", lines);
  write_text(plan.out_dir / "report.json", format_report(outcome.records));
  return outcome;
}

}  // namespace oaa
