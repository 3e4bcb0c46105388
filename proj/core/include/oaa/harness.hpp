#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "oaa/attack.hpp"
#include "oaa/metrics.hpp"

namespace oaa {

/// One line of a manifest file:
///   {"id": "...", "image": "a.png", "label_id": 3, "label_name": "cat",
///    "boxes": "a.json", "saliency": "a_sal.png"}
/// "id", "boxes" and "saliency" are optional; "id" defaults to the image path.
/// Relative paths resolve against the manifest's directory.
struct ManifestEntry {
  std::string id;
  std::string image_path;
  std::int64_t label_id = 0;
  std::string label_name;
  std::optional<std::string> boxes_path;
  std::optional<std::string> saliency_path;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

std::vector<ManifestEntry> parse_manifest(std::string_view text);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::string format_manifest(const std::vector<ManifestEntry>& entries);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// One label per line; surrounding whitespace and blank lines are ignored.
std::set<std::string> read_label_list(const std::filesystem::path& path);

/// Entries whose label name is in `allowed`, order preserved.
std::vector<ManifestEntry> filter_manifest(const std::vector<ManifestEntry>& entries,
                                           const std::set<std::string>& allowed);

/// "builtin:<seed>:<classes>" or "exec:<command>".
struct OracleSpec {
  enum class Kind { kBuiltin, kExec };
  Kind kind = Kind::kBuiltin;
  std::uint64_t seed = 0;
  std::size_t classes = 10;
  std::string command;

  static OracleSpec parse(std::string_view text);
  std::string to_string() const;
};

struct RunPlan {
  AttackConfig attack;  // attack.region.mode selects OA/SLY/SLH/FULL
  OracleSpec oracle;
  std::filesystem::path out_dir;
  /// Directory that relative manifest paths resolve against.
  std::filesystem::path base_dir;
  unsigned jobs = 1;
  bool save_adversarial = false;
};

enum class EntryStatus { kAttacked, kSkipped, kErrored };
std::string_view to_string(EntryStatus status);

/// One line of records.jsonl.
struct RecordLine {
  std::string image_id;
  std::string mode;
  EntryStatus status = EntryStatus::kAttacked;
  std::uint64_t seed = 0;
  std::int64_t label_id = 0;
  std::optional<std::int64_t> predicted;  // oracle's class for the original
  std::string reason;                     // skip or error detail
  // Present when attacked.
  bool success = false;
  std::uint64_t queries = 0;
  std::uint64_t iterations = 0;
  std::uint64_t region_pixels = 0;
  double l2 = 0.0;
  double psnr = 0.0;
  std::optional<double> ssim;

  RunRecord run_record() const;
};

std::string format_record(const RecordLine& record);
RecordLine parse_record(std::string_view line);
std::vector<RecordLine> read_records(const std::filesystem::path& path);

/// Report document derived from the records alone; `attack report`
/// reproduces it byte for byte from records.jsonl.
std::string format_report(const std::vector<RecordLine>& records);

struct BatchOutcome {
  std::vector<RecordLine> records;  // manifest order
  std::size_t attacked = 0;
  std::size_t skipped = 0;
  std::size_t errored = 0;
  std::optional<AggregateReport> report;  // empty when nothing was attacked
};

/// Seed used for the coordinate order of the entry at `index`.
std::uint64_t entry_seed(std::uint64_t plan_seed, std::size_t index);

/// Attacks every entry and writes records.jsonl and report.json into
/// plan.out_dir. Per-entry failures become "errored" records; the batch
/// continues. Originals the oracle misclassifies are "skipped".
BatchOutcome run_batch(const RunPlan& plan, const std::vector<ManifestEntry>& manifest);

}  // namespace oaa
