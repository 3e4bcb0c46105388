// attack: batch driver for object-region restricted pixel-basis attacks.
//
//   attack run --manifest m.jsonl --mode oa --oracle builtin:7:10 --out out/
//   attack filter-manifest --manifest m.jsonl --labels coco.txt --out kept.jsonl
//   attack report --records out/records.jsonl
//   attack conformance --oracle "exec:python serve.py"

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "oaa/harness.hpp"
#include "oaa/process_oracle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;

int run_command(const std::string& manifest_path, const std::string& mode, double pt,
                double epsilon, double step, std::uint64_t max_queries, std::uint64_t seed,
                const std::string& oracle, const std::string& out, unsigned jobs,
                bool save_adversarial) {
  oaa::RunPlan plan;
  try {
    plan.attack.mu = step;
    plan.attack.max_queries = max_queries;
    plan.attack.seed = seed;
    plan.attack.region.p_t = pt;
    plan.attack.region.epsilon = epsilon;
    plan.attack.region.mode = oaa::parse_region_mode(mode);
    plan.attack.validate();
    plan.oracle = oaa::OracleSpec::parse(oracle);
  } catch (const std::exception& e) {
    std::cerr << "attack run: " << e.what() << '\n';
    return kExitUsage;
  }
  plan.out_dir = out;
  plan.base_dir = std::filesystem::path(manifest_path).parent_path();
  plan.jobs = jobs;
  plan.save_adversarial = save_adversarial;

  std::vector<oaa::ManifestEntry> manifest;
  try {
    manifest = oaa::read_manifest(manifest_path);
  } catch (const std::exception& e) {
    std::cerr << "attack run: " << e.what() << '\n';
    return kExitUsage;
  }
  if (manifest.empty()) {
    std::cerr << "attack run: manifest is empty\n";
    return kExitUsage;
  }

  const auto outcome = oaa::run_batch(plan, manifest);
  std::cout << oaa::format_report(outcome.records);
  for (const auto& r : outcome.records) {
    if (r.status == oaa::EntryStatus::kErrored) {
      std::cerr << "errored: " << r.image_id << ": " << r.reason << '\n';
    }
  }
  return outcome.errored > 0 ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-region restricted black-box attack toolkit"};
  app.require_subcommand(1);

  std::string manifest, mode = "oa", oracle, out;
  double pt = 0.3, epsilon = 3.0, step = 0.2;
  std::uint64_t max_queries = 20000, seed = 0;
  unsigned jobs = 1;
  bool save_adversarial = false;

  auto* run = app.add_subcommand("run", "Attack every manifest entry and write records + report");
  run->add_option("--manifest", manifest, "Manifest file, one JSON object per line")->required();
  run->add_option("--mode", mode, "Region mode")
      ->check(CLI::IsMember({"oa", "sly", "slh", "full"}, CLI::ignore_case))
      ->capture_default_str();
  run->add_option("--pt", pt, "Detection confidence threshold")->capture_default_str();
  run->add_option("--epsilon", epsilon, "Activation threshold")->capture_default_str();
  run->add_option("--step", step, "Step size mu")->capture_default_str();
  run->add_option("--max-queries", max_queries, "Query budget per image")->capture_default_str();
  run->add_option("--seed", seed, "Seed for coordinate orders")->capture_default_str();
  run->add_option("--oracle", oracle, "builtin:<seed>:<classes> or exec:<command>")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_flag("--save-adversarial", save_adversarial, "Write adversarial PNGs under <out>/adversarial");

  std::string labels, filtered_out;
  auto* filter = app.add_subcommand("filter-manifest", "Keep entries whose label is listed");
  filter->add_option("--manifest", manifest, "Input manifest")->required();
  filter->add_option("--labels", labels, "Label list, one per line")->required();
  filter->add_option("--out", filtered_out, "Output manifest")->required();

  std::string records;
  auto* report = app.add_subcommand("report", "Recompute the aggregate report from records");
  report->add_option("--records", records, "records.jsonl")->required();

  std::string conformance_oracle;
  auto* conformance = app.add_subcommand("conformance", "Check an oracle server against the wire protocol");
  conformance->add_option("--oracle", conformance_oracle, "exec:<command>")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) {
      return run_command(manifest, mode, pt, epsilon, step, max_queries, seed, oracle, out, jobs,
                         save_adversarial);
    }
    if (*filter) {
      const auto entries = oaa::read_manifest(manifest);
      const auto kept = oaa::filter_manifest(entries, oaa::read_label_list(labels));
      oaa::write_manifest(filtered_out, kept);
      std::cerr << "kept " << kept.size() << " of " << entries.size() << " entries\n";
      return kExitOk;
    }
    if (*report) {
      std::cout << oaa::format_report(oaa::read_records(records));
      return kExitOk;
    }
    if (*conformance) {
      const auto spec = oaa::OracleSpec::parse(conformance_oracle);
      if (spec.kind != oaa::OracleSpec::Kind::kExec) {
        std::cerr << "conformance: only exec: oracles speak the wire protocol\n";
        return kExitUsage;
      }
      const auto result = oaa::run_conformance(spec.command);
      for (const auto& c : result.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty()) std::cout << "  " << c.detail;
        std::cout << '\n';
      }
      return result.passed() ? kExitOk : kExitPartial;
    }
  } catch (const std::exception& e) {
    std::cerr << "attack: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
