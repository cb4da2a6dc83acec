// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Tolerances and runtime limits are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "oracles.hpp"
#include "peic/peic.hpp"

using namespace peic;
using peic::oracle::brute_force_scan;
using peic::oracle::random_bytes;
using peic::oracle::random_signatures;
using peic::oracle::to_hits;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int number;
  std::string title;
  double time_limit_s;  // 0 = none stated
  std::function<Outcome()> run;
};

Bytes element(std::uint64_t v) {
  Bytes b;
  le::put<std::uint64_t>(b, v);
  return b;
}

// 1. Filtered and unfiltered paths detect the same matches, 200 of 200.
Outcome zero_false_negatives() {
  std::mt19937_64 rng(0x5eed0001);
  std::size_t equal = 0, packets = 0, attacks = 0, detected = 0;
  std::string first_failure;
  for (int pair = 0; pair < 200; ++pair) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(10, 2000)(rng);
    TrafficSpec spec;
    spec.packet_count = std::uniform_int_distribution<std::size_t>(1000, 10000)(rng);
    spec.attack_fraction = std::uniform_real_distribution<double>(0.01, 0.10)(rng);
    spec.payload_min = 40;
    spec.payload_max = 256;
    spec.seed = rng();
    spec.signatures = random_signatures(rng, n, 6, 16);
    const BloomParams params{kDefaultBits, static_cast<std::uint32_t>(2 + rng() % 7), rng() | 1, rng() & ~1ULL};

    const auto gen = generate_trace(spec);
    const auto rep = compare_baseline(program_matcher(spec.signatures, params), gen.trace);
    packets += gen.trace.size();
    attacks += gen.manifest.attack_count();
    detected += rep.detected_packets_filtered;
    if (rep.equivalent && rep.detected_packets_unfiltered == gen.manifest.attack_count()) ++equal;
    else if (first_failure.empty()) first_failure = " first failure at pair " + std::to_string(pair);
  }
  std::ostringstream os;
  os << equal << "/200 pairs equivalent; " << packets << " packets, " << attacks << " attack packets, " << detected
     << " detected after filtering" << first_failure;
  return {equal == 200 && detected == attacks, os.str()};
}

// 2. Empirical FPR within 4 binomial standard errors in at least 15 of 16 cells.
Outcome fpr_calibration() {
  SweepGrid grid;
  grid.m = 16384;
  grid.k_list = {2, 4, 6, 8};
  grid.n_list = {100, 500, 1000, 2000};
  grid.trials = 100000;
  grid.seed = 0x5eed0002;
  const auto rows = fpr_sweep(grid);
  std::size_t within = 0;
  double worst = 0.0, spot = -1.0;
  for (const auto& r : rows) {
    within += r.z_score() <= 4.0;
    worst = std::max(worst, r.z_score());
    if (r.k == 4 && r.n == 2000) spot = r.fpr_theory;
  }
  const bool spot_ok = std::abs(spot - 0.02227) <= 1e-4;
  std::ostringstream os;
  os << within << "/16 cells within 4 sigma (worst z=" << worst << "); theory(k=4,n=2000)=" << spot;
  return {within >= 15 && rows.size() == 16 && spot_ok, os.str()};
}

// 3. Percent of packets the host analyzes lies between the attack share and
// the attack share plus the union-bound false-positive allowance.
Outcome host_load_reduction() {
  std::mt19937_64 rng(0x5eed0003);
  TrafficSpec spec;
  spec.packet_count = 10000;
  spec.attack_fraction = 0.05;
  spec.seed = 0x5eed0013;
  spec.signatures = random_signatures(rng, 1000, 8, 32);
  const auto gen = generate_trace(spec);
  const auto matcher = program_matcher(spec.signatures, BloomParams{16384, 4, kDefaultSeedA, kDefaultSeedB});
  const auto run = run_trace(matcher, gen.trace);
  const auto rows = host_load_report({{"5% attacks, n=1000, k=4", run.stats}});
  const double pct = rows.at(0).percent_analyzed;

  double fp_mean = 0.0, fp_var = 0.0;
  for (std::size_t i = 0; i < gen.trace.size(); ++i) {
    if (gen.manifest.records[i].is_attack) continue;
    const double p = candidate_probability_bound(matcher, parse_packet(gen.trace.frames[i])->payload_length);
    fp_mean += p;
    fp_var += p * (1 - p);
  }
  const double total = static_cast<double>(run.stats.total);
  const double lower = 100.0 * static_cast<double>(gen.manifest.attack_count()) / total;
  const double upper = lower + 100.0 * (fp_mean + 4.0 * std::sqrt(fp_var)) / total;
  std::ostringstream os;
  os << "percent analyzed " << pct << " in [" << lower << ", " << upper << "]; true matches " << run.stats.true_matches
     << "/" << gen.manifest.attack_count() << ", false-positive forwards " << run.stats.false_positive_forwards << " (closed form expects " << fp_mean << ")";
  return {lower == 5.0 && pct >= lower && pct <= upper && run.stats.consistent() &&
              run.stats.true_matches == gen.manifest.attack_count(),
          os.str()};
}

// 4. verify(scan(payload)) equals a naive all-offsets matcher on 500 pairs.
Outcome scanner_oracle() {
  std::mt19937_64 rng(0x5eed0004);
  std::size_t equal = 0, hits = 0;
  for (int t = 0; t < 500; ++t) {
    const auto set = random_signatures(rng, 1 + rng() % 300, 2, 12);
    const BloomParams params{256 + rng() % 16384, static_cast<std::uint32_t>(1 + rng() % 8), rng() | 1, rng() & ~1ULL};
    const auto matcher = program_matcher(set, params);
    auto payload = random_bytes(rng, rng() % 1500);
    for (int e = 0; e < 6 && !payload.empty(); ++e) {
      const auto& pat = set.signatures()[rng() % set.size()].pattern;
      if (pat.size() > payload.size()) continue;
      std::copy(pat.begin(), pat.end(), payload.begin() + static_cast<std::ptrdiff_t>(rng() % (payload.size() - pat.size() + 1)));
    }
    const auto got = to_hits(matcher.verify_candidates(payload, matcher.scan_payload(payload)));
    const auto want = brute_force_scan(set.signatures(), payload);
    hits += want.size();
    equal += got == want;
  }
  return {equal == 500, std::to_string(equal) + "/500 pairs identical (" + std::to_string(hits) + " exact matches)"};
}

// 5. Filter images, capture files and rebuilds are bit-exact.
Outcome persistence() {
  std::mt19937_64 rng(0x5eed0005);
  std::size_t images = 0, bad_images = 0;
  for (int t = 0; t < 100; ++t) {
    BloomFilter f(BloomParams{8 + rng() % 40000, static_cast<std::uint32_t>(1 + rng() % 16), rng() | 1, rng() & ~1ULL});
    const auto count = rng() % 3000;
    for (std::uint64_t i = 0; i < count; ++i) f.add(random_bytes(rng, 1 + rng() % 32));
    const auto img = serialize_filter(f);
    const auto back = deserialize_filter(img);
    ++images;
    if (!(back == f) || serialize_filter(back) != img ||
        le::get<std::uint32_t>(img, img.size() - 4) != crc32(ByteView(img).first(img.size() - 4)))
      ++bad_images;
  }

  TrafficSpec spec;
  spec.packet_count = 3000;
  spec.attack_fraction = 0.05;
  spec.seed = 0x5eed0015;
  spec.signatures = random_signatures(rng, 200, 4, 20);
  const auto gen = generate_trace(spec);
  const auto file = write_pcap(gen.trace);
  const auto reread = read_pcap(file);
  const bool pcap_ok = reread == gen.trace && write_pcap(reread) == file;

  const BloomParams params{16384, 4, 0x1234, 0x5678};
  const auto a = program_matcher(spec.signatures, params);
  const auto b = program_matcher(spec.signatures, params);
  bool rebuild_ok = a.filters().size() == b.filters().size();
  for (std::size_t i = 0; rebuild_ok && i < a.filters().size(); ++i)
    rebuild_ok = serialize_filter(a.filters()[i].filter) == serialize_filter(b.filters()[i].filter);
  const bool regen_ok = write_pcap(generate_trace(spec).trace) == file;

  std::ostringstream os;
  os << images - bad_images << "/" << images << " images round-trip; capture " << (pcap_ok ? "ok" : "MISMATCH") << " ("
     << reread.size() << " frames); rebuild " << (rebuild_ok ? "identical" : "DIFFERENT") << "; regenerate "
     << (regen_ok ? "identical" : "DIFFERENT");
  return {bad_images == 0 && pcap_ok && rebuild_ok && regen_ok, os.str()};
}

// 6. No false negatives, query purity and add-monotonicity.
Outcome bloom_structure() {
  std::mt19937_64 rng(0x5eed0006);
  std::size_t fn_trials_ok = 0, purity_ok = 0, monotone_ok = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 5000)(rng);
    BloomFilter f(BloomParams{16384, static_cast<std::uint32_t>(1 + rng() % 8), rng() | 1, rng() & ~1ULL});
    std::vector<Bytes> added;
    bool monotone = true;
    auto previous = f.words();
    for (std::size_t i = 0; i < n; ++i) {
      added.push_back(random_bytes(rng, 1 + rng() % 24));
      f.add(added.back());
      const auto& now = f.words();
      for (std::size_t w = 0; w < now.size(); ++w) monotone &= (previous[w] & ~now[w]) == 0;
      previous = now;
    }
    bool all_members = true;
    for (const auto& e : added) all_members &= f.contains(e);
    fn_trials_ok += all_members && f.popcount() <= f.params().k * f.count_programmed();
    monotone_ok += monotone;

    const auto before = serialize_filter(f);
    for (int q = 0; q < 2000; ++q) (void)f.check(element(rng()));
    purity_ok += serialize_filter(f) == before;
  }
  std::ostringstream os;
  os << "no-false-negative " << fn_trials_ok << "/100, purity " << purity_ok << "/100, monotone " << monotone_ok << "/100";
  return {fn_trials_ok == 100 && purity_ok == 100 && monotone_ok == 100, os.str()};
}

// 7. optimal_k within 1 of the exhaustive argmin over k = 1..32.
Outcome optimal_k_consistency() {
  const SweepGrid defaults;
  std::vector<std::uint64_t> ns = defaults.n_list;
  for (auto n : {100ULL, 500ULL, 1000ULL, 2000ULL})
    if (std::find(ns.begin(), ns.end(), n) == ns.end()) ns.push_back(n);
  std::ostringstream os;
  bool ok = true;
  for (auto n : ns) {
    std::uint32_t best = 1;
    for (std::uint32_t k = 2; k <= 32; ++k)
      if (fpr_theoretical(16384, k, n).fpr < fpr_theoretical(16384, best, n).fpr) best = k;
    const auto got = optimal_k(16384, n);
    const bool cell = std::abs(static_cast<int>(got) - static_cast<int>(best)) <= 1;
    ok &= cell;
    os << "n=" << n << ":" << got << "/" << best << (cell ? "" : "!") << " ";
  }
  return {ok, os.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "zero false negatives (filtered == unfiltered detections)", 120.0, zero_false_negatives},
      {2, "FPR calibration against closed form", 60.0, fpr_calibration},
      {3, "host-load reduction bound", 30.0, host_load_reduction},
      {4, "scanner oracle equivalence", 30.0, scanner_oracle},
      {5, "bit-exact persistence and formats", 0.0, persistence},
      {6, "Bloom structural properties", 0.0, bloom_structure},
      {7, "optimal_k consistency", 0.0, optimal_k_consistency},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit_s == 0.0 || secs < c.time_limit_s;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("[%s] %d. %s: %s (%.2fs%s)\n", pass ? "PASS" : "FAIL", c.number, c.title.c_str(), out.detail.c_str(), secs,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
