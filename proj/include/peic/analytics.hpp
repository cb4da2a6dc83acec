#pragma once

// Result tables: false-positive sweeps against the closed form, and the
// share of packets the host ends up analyzing.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "peic/bloom.hpp"
#include "peic/csv.hpp"
#include "peic/error.hpp"
#include "peic/pipeline.hpp"
#include "peic/signature.hpp"

namespace peic {

inline constexpr std::uint64_t kMinSweepTrials = 1000;

struct FprSweepRow {
  std::uint64_t m = 0;
  std::uint32_t k = 0;
  std::uint64_t n = 0;
  double fpr_theory = 0.0;
  double fpr_empirical = 0.0;
  std::uint64_t trials = 0;
  double std_err = 0.0;  // binomial, from the theoretical rate

  /// |empirical - theory| in units of std_err; 0 when both are exactly 0.
  double z_score() const noexcept {
    const double diff = std::abs(fpr_empirical - fpr_theory);
    if (std_err == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
    return diff / std_err;
  }

  static std::vector<std::string> csv_header() { return {"m", "k", "n", "fpr_theory", "fpr_empirical", "trials", "std_err"}; }

  std::vector<std::string> csv_fields() const {
    return {csv::num(m), csv::num(k), csv::num(n), csv::num(fpr_theory), csv::num(fpr_empirical), csv::num(trials),
            csv::num(std_err)};
  }
};

struct SweepGrid {
  std::uint64_t m = kDefaultBits;
  std::vector<std::uint32_t> k_list{2, 4, 6, 8};
  std::vector<std::uint64_t> n_list{100, 250, 500, 1000, 2000, 4000};
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::uint64_t seed_a = kDefaultSeedA;
  std::uint64_t seed_b = kDefaultSeedB;

  void validate() const {
    if (m < 8) throw Error(Errc::invalid_grid, "m must be at least 8");
    if (k_list.empty() || n_list.empty()) throw Error(Errc::invalid_grid, "k and n lists must be non-empty");
    for (auto k : k_list)
      if (k < 1) throw Error(Errc::invalid_grid, "k must be at least 1");
    if (trials < kMinSweepTrials) throw Error(Errc::invalid_grid, "trials must be at least " + std::to_string(kMinSweepTrials));
    if (seed_a == seed_b) throw Error(Errc::invalid_grid, "seed_a and seed_b must differ");
  }
};

namespace detail {

inline Bytes u64_element(std::uint64_t v) {
  Bytes b;
  b.reserve(8);
  le::put<std::uint64_t>(b, v);
  return b;
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// One cell: program n distinct random 8-byte elements, then query `trials`
/// fresh elements that were never added.
inline FprSweepRow fpr_cell(const BloomParams& params, std::uint64_t n, std::uint64_t trials, std::uint64_t seed) {
  BloomFilter filter(params);
  std::mt19937_64 rng(seed);
  std::unordered_set<std::uint64_t> members;
  members.reserve(n * 2);
  while (members.size() < n) {
    const auto v = rng();
    if (members.insert(v).second) filter.add(detail::u64_element(v));
  }
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials;) {
    const auto v = rng();
    if (members.count(v)) continue;
    hits += filter.contains(detail::u64_element(v)) ? 1 : 0;
    ++t;
  }
  FprSweepRow row;
  row.m = params.m;
  row.k = params.k;
  row.n = n;
  row.fpr_theory = fpr_theoretical(params.m, params.k, n).fpr;
  row.fpr_empirical = static_cast<double>(hits) / static_cast<double>(trials);
  row.trials = trials;
  row.std_err = std::sqrt(row.fpr_theory * (1.0 - row.fpr_theory) / static_cast<double>(trials));
  return row;
}

/// Rows in grid order: k outer, n inner. Each cell's RNG seed derives from
/// the grid seed and the cell position.
inline std::vector<FprSweepRow> fpr_sweep(const SweepGrid& grid) {
  grid.validate();
  std::vector<FprSweepRow> rows;
  std::uint64_t cell = 0;
  for (auto k : grid.k_list) {
    for (auto n : grid.n_list) {
      const BloomParams params{grid.m, k, grid.seed_a, grid.seed_b};
      rows.push_back(fpr_cell(params, n, grid.trials, detail::splitmix64(grid.seed ^ detail::splitmix64(++cell))));
    }
  }
  return rows;
}

struct HostLoadRow {
  std::string scenario;
  std::uint64_t total = 0;
  std::uint64_t forwarded = 0;
  double percent_analyzed = 0.0;

  static std::vector<std::string> csv_header() { return {"scenario", "total", "forwarded", "percent_analyzed"}; }

  std::vector<std::string> csv_fields() const {
    return {scenario, csv::num(total), csv::num(forwarded), csv::num(percent_analyzed)};
  }
};

struct Scenario {
  std::string label;
  PipelineStats stats;
};

inline std::vector<HostLoadRow> host_load_report(const std::vector<Scenario>& scenarios) {
  std::vector<HostLoadRow> rows;
  for (const auto& s : scenarios) {
    if (s.stats.total == 0) throw Error(Errc::zero_total, "scenario '" + s.label + "' saw no packets");
    rows.push_back({s.label, s.stats.total, s.stats.forwarded,
                    100.0 * static_cast<double>(s.stats.forwarded) / static_cast<double>(s.stats.total)});
  }
  return rows;
}

/// Union bound on the chance that a clean payload of the given length
/// produces at least one candidate: sum over lengths of windows * per-window FPR.
inline double candidate_probability_bound(const SignatureMatcher& matcher, std::size_t payload_len) {
  double p = 0.0;
  const auto& params = matcher.params();
  for (const auto& lf : matcher.filters()) {
    if (payload_len < lf.length) continue;
    const auto windows = static_cast<double>(payload_len - lf.length + 1);
    p += windows * fpr_theoretical(params.m, params.k, lf.filter.count_programmed()).fpr;
  }
  return std::min(p, 1.0);
}

}  // namespace peic
