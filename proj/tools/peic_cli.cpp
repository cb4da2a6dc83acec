// peic: build filter images, generate traffic, replay it through the
// simulated filtering card, and sweep false-positive rates.
//
// Exit codes: 0 success, 1 usage/validation, 2 I/O, 3 detection mismatch
// between the filtered and unfiltered paths.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "peic/peic.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kIo = 2, kMismatch = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

peic::Bytes slurp(const std::string& path) {
  peic::Bytes data;
  if (!peic::read_file(path, data)) throw IoError("cannot read " + path);
  return data;
}

void spill(const std::string& path, peic::ByteView data) {
  if (!peic::write_file(path, data)) throw IoError("cannot write " + path);
}

void spill(const std::string& path, const std::string& text) { spill(path, peic::as_bytes(text)); }

peic::SignatureSet load_rules_file(const std::string& path) {
  const auto text = slurp(path);
  return peic::load_rules(peic::as_chars(text));
}

std::string image_name(std::size_t length) { return "filter_len" + std::to_string(length) + ".img"; }

struct Options {
  std::string rules, out, in, manifest, report, decision_log, index;
  std::uint64_t m = peic::kDefaultBits;
  std::uint32_t k = 4;
  std::uint64_t seed_a = peic::kDefaultSeedA;
  std::uint64_t seed_b = peic::kDefaultSeedB;
  std::uint64_t seed = 1;
  std::size_t count = 1000;
  double attack_fraction = 0.0;
  std::size_t payload_min = 40;
  std::size_t payload_max = peic::kMaxPayloadLen;
  std::vector<std::uint32_t> k_list{2, 4, 6, 8};
  std::vector<std::uint64_t> n_list{100, 250, 500, 1000, 2000, 4000};
  std::uint64_t n_single = 0;
  std::uint64_t trials = 100000;
};

int cmd_build(const Options& o) {
  const auto set = load_rules_file(o.rules);
  const peic::BloomParams params{o.m, o.k, o.seed_a, o.seed_b};
  const auto matcher = peic::program_matcher(set, params);

  fs::create_directories(o.out);
  std::string index;
  std::cout << "signatures: " << set.size() << "\n";
  std::cout << "distinct lengths: " << matcher.filters().size() << "\n";
  for (const auto& lf : matcher.filters()) {
    const auto name = image_name(lf.length);
    spill((fs::path(o.out) / name).string(), peic::serialize_filter(lf.filter));
    index += std::to_string(lf.length) + "," + name + "\n";
    const auto est = peic::fpr_theoretical(params.m, params.k, lf.filter.count_programmed());
    std::cout << "  length " << lf.length << ": n=" << lf.filter.count_programmed() << " fpr=" << peic::csv::num(est.fpr)
              << "\n";
  }
  spill((fs::path(o.out) / "index.txt").string(), index);
  return kOk;
}

int cmd_gen(const Options& o) {
  peic::TrafficSpec spec;
  spec.packet_count = o.count;
  spec.attack_fraction = o.attack_fraction;
  spec.payload_min = o.payload_min;
  spec.payload_max = o.payload_max;
  spec.seed = o.seed;
  if (!o.rules.empty()) spec.signatures = load_rules_file(o.rules);
  const auto gen = peic::generate_trace(spec);
  spill(o.out, peic::write_pcap(gen.trace));
  spill(o.manifest, peic::write_manifest(gen.manifest));
  std::cout << "frames: " << gen.trace.size() << "\nattacks: " << gen.manifest.attack_count() << "\n";
  return kOk;
}

std::vector<peic::SignatureMatcher::LengthFilter> load_index(const std::string& index_path) {
  const auto text = slurp(index_path);
  const auto base = fs::path(index_path).parent_path();
  std::vector<peic::SignatureMatcher::LengthFilter> filters;
  for (const auto& row : peic::csv::parse(peic::as_chars(text))) {
    if (row.size() != 2) throw peic::Error(peic::Errc::inconsistent_filters, "index lines must be length,path");
    fs::path img = row[1];
    if (img.is_relative()) img = base / img;
    const auto bytes = slurp(img.string());
    std::size_t length = 0;
    try {
      length = std::stoul(row[0]);
    } catch (const std::exception&) {
      throw peic::Error(peic::Errc::inconsistent_filters, "bad length '" + row[0] + "' in index");
    }
    try {
      filters.push_back({length, peic::deserialize_filter(bytes)});
    } catch (const peic::Error& e) {
      throw IoError(img.string() + ": " + e.what());
    }
  }
  return filters;
}

int cmd_scan(const Options& o) {
  const auto set = load_rules_file(o.rules);
  const auto matcher = peic::matcher_from_filters(set, load_index(o.index));
  peic::Trace trace;
  try {
    trace = peic::read_pcap(slurp(o.in));
  } catch (const peic::Error& e) {
    throw IoError(o.in + ": " + e.what());
  }

  const auto rep = peic::compare_baseline(matcher, trace);
  const auto& s = rep.filtered.stats;
  spill(o.out, peic::write_pcap(rep.filtered.forwarded));
  spill(o.report, peic::emit_csv(std::vector<peic::PipelineStats>{s}));
  if (!o.decision_log.empty()) spill(o.decision_log, peic::emit_csv(rep.filtered.log));

  std::cout << "total: " << s.total << "\nforwarded (interrupts): " << s.forwarded << "\ndropped: " << s.dropped
            << "\ntrue matches: " << s.true_matches << "\nfalse-positive forwards: " << s.false_positive_forwards
            << "\nnon-parseable forwards: " << s.non_parseable_forwards
            << "\npercent analyzed: " << peic::csv::num(s.percent_analyzed())
            << "\nfifo peak depth: " << rep.filtered.fifo.peak_depth << " overflows: " << rep.filtered.fifo.overflow_count
            << "\ndetections unfiltered/filtered: " << rep.detections_unfiltered << "/" << rep.detections_filtered << "\n";
  if (!o.manifest.empty()) {
    const auto rows = peic::csv::parse(peic::as_chars(slurp(o.manifest)));
    std::size_t attacks = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) attacks += rows[i].size() > 1 && rows[i][1] == "1";
    std::cout << "manifest attacks: " << attacks << "\n";
  }
  if (!rep.equivalent) {
    std::cerr << "error: detection mismatch on " << rep.mismatched_packets << " packets\n";
    return kMismatch;
  }
  return kOk;
}

int cmd_sweep(const Options& o, bool single_k, bool single_n) {
  peic::SweepGrid grid;
  grid.m = o.m;
  grid.k_list = single_k ? std::vector<std::uint32_t>{o.k} : o.k_list;
  grid.n_list = single_n ? std::vector<std::uint64_t>{o.n_single} : o.n_list;
  grid.trials = o.trials;
  grid.seed = o.seed;
  grid.seed_a = o.seed_a;
  grid.seed_b = o.seed_b;
  const auto rows = peic::fpr_sweep(grid);
  spill(o.out, peic::emit_csv(rows));
  std::cout << "rows: " << rows.size() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bloom-filter signature offload simulator"};
  app.require_subcommand(1);
  Options o;

  auto add_params = [&o](CLI::App* sub) {
    sub->add_option("--m", o.m, "Bits per filter vector")->capture_default_str();
    sub->add_option("--seed-a", o.seed_a, "Seed of the first base hash")->capture_default_str();
    sub->add_option("--seed-b", o.seed_b, "Seed of the second base hash")->capture_default_str();
  };

  auto* build = app.add_subcommand("build", "Program filter images from a rule file");
  build->add_option("--rules", o.rules, "Rule file")->required();
  build->add_option("--k", o.k, "Hash functions per filter")->capture_default_str();
  add_params(build);
  build->add_option("--out", o.out, "Output directory for images and index.txt")->required();

  auto* gen = app.add_subcommand("gen", "Generate a synthetic capture and its manifest");
  gen->add_option("--count", o.count, "Packets")->capture_default_str();
  gen->add_option("--attack-fraction", o.attack_fraction, "Share of packets carrying a signature")->capture_default_str();
  gen->add_option("--payload-min", o.payload_min)->capture_default_str();
  gen->add_option("--payload-max", o.payload_max)->capture_default_str();
  gen->add_option("--seed", o.seed)->capture_default_str();
  gen->add_option("--rules", o.rules, "Rule file (required when attacks are requested)");
  gen->add_option("--out", o.out, "Output capture file")->required();
  gen->add_option("--manifest", o.manifest, "Output manifest CSV")->required();

  auto* scan = app.add_subcommand("scan", "Replay a capture through the filter and compare with the unfiltered host");
  scan->add_option("--index", o.index, "Filter index written by build")->required();
  scan->add_option("--rules", o.rules, "Rule file used for host-side verification")->required();
  scan->add_option("--in", o.in, "Input capture")->required();
  scan->add_option("--out", o.out, "Capture of forwarded packets")->required();
  scan->add_option("--report", o.report, "Stats CSV")->required();
  scan->add_option("--decision-log", o.decision_log, "Per-packet decision CSV");
  scan->add_option("--manifest", o.manifest, "Generator manifest, for cross-checking");

  auto* sweep = app.add_subcommand("sweep", "Empirical vs closed-form false-positive rate grid");
  add_params(sweep);
  sweep->add_option("--k-list", o.k_list, "Hash counts")->delimiter(',')->capture_default_str();
  sweep->add_option("--n-list", o.n_list, "Element counts")->delimiter(',')->capture_default_str();
  auto* k_opt = sweep->add_option("--k", o.k, "Single hash count (overrides --k-list)");
  auto* n_opt = sweep->add_option("--n", o.n_single, "Single element count (overrides --n-list)");
  sweep->add_option("--trials", o.trials, "Non-member queries per cell")->capture_default_str();
  sweep->add_option("--seed", o.seed)->capture_default_str();
  sweep->add_option("--out", o.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*build) return cmd_build(o);
    if (*gen) return cmd_gen(o);
    if (*scan) return cmd_scan(o);
    if (*sweep) return cmd_sweep(o, k_opt->count() > 0, n_opt->count() > 0);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const peic::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
