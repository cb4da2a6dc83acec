#pragma once

// Bloom filter over byte strings: an m-bit vector probed by k hash functions
// derived from two seeded 64-bit digests (double hashing).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "peic/bytes.hpp"
#include "peic/error.hpp"

namespace peic {

/// 2 kB vector.
inline constexpr std::uint64_t kDefaultBits = 16384;
inline constexpr std::uint64_t kDefaultSeedA = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kDefaultSeedB = 0x9e3779b97f4a7c15ULL;
/// Upper bound used by optimal_k; also the largest grid scanned by tests.
inline constexpr std::uint32_t kMaxHashes = 32;

struct BloomParams {
  std::uint64_t m = kDefaultBits;
  std::uint32_t k = 4;
  std::uint64_t seed_a = kDefaultSeedA;
  std::uint64_t seed_b = kDefaultSeedB;

  void validate() const {
    if (m < 8) throw Error(Errc::invalid_params, "m must be at least 8 bits");
    if (k < 1) throw Error(Errc::invalid_params, "k must be at least 1");
    if (k > std::numeric_limits<std::uint16_t>::max()) throw Error(Errc::invalid_params, "k does not fit in 16 bits");
    if (seed_a == seed_b) throw Error(Errc::invalid_params, "seed_a and seed_b must differ");
  }

  friend bool operator==(const BloomParams&, const BloomParams&) = default;
};

/// Byte-at-a-time multiply/xor mixer with a murmur-style finalizer. The
/// state can be snapshotted after any prefix, which the scanner uses to
/// digest every window length starting at one offset in a single pass.
class Mixer {
 public:
  static constexpr std::uint64_t kPrime = 0x100000001B3ULL;
  static constexpr std::uint64_t kFinal = 0xFF51AFD7ED558CCDULL;

  explicit constexpr Mixer(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr void absorb(std::uint8_t byte) noexcept { state_ = (state_ ^ byte) * kPrime; }

  constexpr void absorb(ByteView bytes) noexcept {
    for (auto b : bytes) absorb(b);
  }

  constexpr std::uint64_t finish() const noexcept {
    std::uint64_t s = state_;
    s ^= s >> 33;
    s *= kFinal;
    s ^= s >> 33;
    return s;
  }

 private:
  std::uint64_t state_;
};

/// k index functions h_i(x) = (g1(x) + i * (g2(x) | 1)) mod m, zero-based.
class HashFamily {
 public:
  struct Digest {
    std::uint64_t g1;
    std::uint64_t g2;
  };

  explicit HashFamily(const BloomParams& params) : params_(params) { params_.validate(); }

  const BloomParams& params() const noexcept { return params_; }

  Digest digest(ByteView element) const {
    require_non_empty(element);
    Mixer a(params_.seed_a), b(params_.seed_b);
    a.absorb(element);
    b.absorb(element);
    return {a.finish(), b.finish()};
  }

  std::uint64_t first_index(std::uint64_t g1) const noexcept { return g1 % params_.m; }

  std::uint64_t index(const Digest& d, std::uint32_t i) const noexcept {
    // Wrapping 64-bit arithmetic before the reduction is part of the contract.
    return (d.g1 + static_cast<std::uint64_t>(i) * (d.g2 | 1ULL)) % params_.m;
  }

  std::vector<std::uint64_t> indices(ByteView element) const {
    const Digest d = digest(element);
    std::vector<std::uint64_t> out(params_.k);
    for (std::uint32_t i = 0; i < params_.k; ++i) out[i] = index(d, i);
    return out;
  }

  static void require_non_empty(ByteView element) {
    if (element.empty()) throw Error(Errc::empty_element, "elements must be non-empty byte sequences");
  }

 private:
  BloomParams params_;
};

enum class Membership { not_member, member };

class BloomFilter {
 public:
  explicit BloomFilter(const BloomParams& params = {})
      : family_(params), words_((params.m + 63) / 64, 0) {}

  const BloomParams& params() const noexcept { return family_.params(); }
  const HashFamily& family() const noexcept { return family_; }
  std::uint64_t size_bits() const noexcept { return params().m; }

  /// Number of add() calls; duplicates are counted again.
  std::uint64_t count_programmed() const noexcept { return count_; }

  void add(ByteView element) {
    const auto d = family_.digest(element);
    for (std::uint32_t i = 0; i < params().k; ++i) set_bit(family_.index(d, i));
    ++count_;
  }

  Membership check(ByteView element) const { return check(family_.digest(element)); }

  Membership check(const HashFamily::Digest& d) const noexcept {
    for (std::uint32_t i = 0; i < params().k; ++i)
      if (!test_bit(family_.index(d, i))) return Membership::not_member;
    return Membership::member;
  }

  bool contains(ByteView element) const { return check(element) == Membership::member; }

  bool test_bit(std::uint64_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1ULL; }

  std::uint64_t popcount() const noexcept {
    std::uint64_t total = 0;
    for (auto w : words_) total += static_cast<std::uint64_t>(std::popcount(w));
    return total;
  }

  /// Raw vector access for persistence: bit i lives in word i/64, bit i%64.
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  /// Rebuilds a filter from persisted state. Bits at or beyond m must be clear.
  static BloomFilter restore(const BloomParams& params, std::vector<std::uint64_t> words, std::uint64_t count) {
    BloomFilter f(params);
    if (words.size() != f.words_.size()) throw Error(Errc::invalid_params, "vector size does not match m");
    if (params.m % 64 != 0 && !words.empty()) {
      const std::uint64_t tail_mask = ~((1ULL << (params.m % 64)) - 1);
      if (words.back() & tail_mask) throw Error(Errc::invalid_params, "bits set beyond m");
    }
    f.words_ = std::move(words);
    f.count_ = count;
    return f;
  }

  friend bool operator==(const BloomFilter& a, const BloomFilter& b) noexcept {
    return a.params() == b.params() && a.count_ == b.count_ && a.words_ == b.words_;
  }

 private:
  void set_bit(std::uint64_t i) noexcept { words_[i >> 6] |= 1ULL << (i & 63); }

  HashFamily family_;
  std::vector<std::uint64_t> words_;
  std::uint64_t count_ = 0;
};

struct FprEstimate {
  double p_zero;  // probability a given bit is still 0 after n insertions
  double fpr;     // (1 - p_zero)^k
};

/// Closed-form false-positive estimate for n elements in an m-bit, k-hash filter.
inline FprEstimate fpr_theoretical(std::uint64_t m, std::uint32_t k, std::uint64_t n) {
  if (m < 1 || k < 1) throw Error(Errc::invalid_params, "fpr_theoretical needs m >= 1 and k >= 1");
  const double load = static_cast<double>(k) * static_cast<double>(n) / static_cast<double>(m);
  const double p_zero = std::exp(-load);
  // 1 - e^{-x} via expm1 keeps precision for tiny loads.
  const double fpr = std::pow(-std::expm1(-load), static_cast<double>(k));
  return {p_zero, fpr};
}

/// round((m/n) ln 2), clamped to [1, max_k].
inline std::uint32_t optimal_k(std::uint64_t m, std::uint64_t n, std::uint32_t max_k = kMaxHashes) {
  if (n == 0) throw Error(Errc::invalid_params, "optimal_k needs n >= 1");
  if (max_k < 1) throw Error(Errc::invalid_params, "max_k must be at least 1");
  const double k = std::round(static_cast<double>(m) / static_cast<double>(n) * std::log(2.0));
  if (k < 1.0) return 1;
  if (k > static_cast<double>(max_k)) return max_k;
  return static_cast<std::uint32_t>(k);
}

}  // namespace peic
