#pragma once

// Rule ingestion, per-length Bloom programming, sliding-window scanning and
// exact host-side verification.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "peic/aho_corasick.hpp"
#include "peic/bloom.hpp"
#include "peic/bytes.hpp"
#include "peic/error.hpp"

namespace peic {

inline constexpr std::size_t kMinPatternLen = 2;
inline constexpr std::size_t kMaxPatternLen = 64;

struct Signature {
  std::string id;
  Bytes pattern;

  friend bool operator==(const Signature&, const Signature&) = default;
};

class SignatureSet {
 public:
  SignatureSet() = default;

  /// Throws duplicate-id or pattern-length-out-of-range.
  void add(Signature sig, std::optional<std::size_t> line = std::nullopt) {
    if (sig.id.empty()) throw Error(Errc::malformed_line, "empty signature id", line);
    if (sig.pattern.size() < kMinPatternLen || sig.pattern.size() > kMaxPatternLen)
      throw Error(Errc::pattern_length_out_of_range,
                  "pattern of " + std::to_string(sig.pattern.size()) + " bytes for '" + sig.id + "'", line);
    if (!ids_.insert(sig.id).second) throw Error(Errc::duplicate_id, "'" + sig.id + "'", line);
    by_length_[sig.pattern.size()].push_back(signatures_.size());
    signatures_.push_back(std::move(sig));
  }

  const std::vector<Signature>& signatures() const noexcept { return signatures_; }
  /// Pattern length -> indices into signatures(), in insertion order.
  const std::map<std::size_t, std::vector<std::size_t>>& by_length() const noexcept { return by_length_; }
  std::size_t size() const noexcept { return signatures_.size(); }
  bool empty() const noexcept { return signatures_.empty(); }

 private:
  std::vector<Signature> signatures_;
  std::map<std::size_t, std::vector<std::size_t>> by_length_;
  std::unordered_set<std::string> ids_;
};

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline int hex_digit(char c) noexcept {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline std::optional<Bytes> decode_hex(std::string_view s) {
  if (s.empty() || s.size() % 2 != 0) return std::nullopt;
  Bytes out;
  out.reserve(s.size() / 2);
  for (std::size_t i = 0; i < s.size(); i += 2) {
    const int hi = hex_digit(s[i]), lo = hex_digit(s[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

}  // namespace detail

/// Parses `id,encoding,value` lines (encoding is ascii or hex). Lines whose
/// first non-blank character is '#' and blank lines are skipped. An ascii
/// value is taken verbatim up to the end of line (commas included); only a
/// trailing CR is stripped.
inline SignatureSet load_rules(std::string_view text) {
  SignatureSet set;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto stripped = detail::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw Error(Errc::malformed_line, "expected id,encoding,value", line_no);
    const auto id = detail::trim(line.substr(0, c1));
    const auto enc = detail::trim(line.substr(c1 + 1, c2 - c1 - 1));
    const auto value = line.substr(c2 + 1);
    if (id.empty()) throw Error(Errc::malformed_line, "empty id", line_no);

    Bytes pattern;
    if (enc == "ascii") {
      pattern = to_bytes(value);
    } else if (enc == "hex") {
      auto decoded = detail::decode_hex(detail::trim(value));
      if (!decoded) throw Error(Errc::bad_hex, "'" + std::string(value) + "'", line_no);
      pattern = std::move(*decoded);
    } else {
      throw Error(Errc::malformed_line, "unknown encoding '" + std::string(enc) + "'", line_no);
    }
    set.add(Signature{std::string(id), std::move(pattern)}, line_no);
  }
  return set;
}

struct CandidateMatch {
  std::size_t offset = 0;
  std::size_t length = 0;
  std::optional<std::string> signature_id;

  friend bool operator==(const CandidateMatch&, const CandidateMatch&) = default;
  friend bool operator<(const CandidateMatch& a, const CandidateMatch& b) noexcept {
    return a.offset != b.offset ? a.offset < b.offset : a.length < b.length;
  }
};

/// One Bloom filter per distinct pattern length, all with the same
/// parameters, plus the exact pattern table the host uses for verification.
/// Immutable after construction; concurrent scans are safe.
class SignatureMatcher {
 public:
  struct LengthFilter {
    std::size_t length;
    BloomFilter filter;
  };

  /// A matcher with nothing programmed: every scan is empty.
  explicit SignatureMatcher(const BloomParams& params = {}) : params_(params) {
    params_.validate();
    exact_.compile();
  }

  const BloomParams& params() const noexcept { return params_; }
  const std::vector<LengthFilter>& filters() const noexcept { return filters_; }
  std::size_t signature_count() const noexcept { return signature_count_; }

  std::vector<std::size_t> lengths() const {
    std::vector<std::size_t> out;
    for (const auto& lf : filters_) out.push_back(lf.length);
    return out;
  }

  /// Slides a window of every programmed length over the payload and
  /// reports each Bloom MEMBER answer, sorted by (offset, length).
  std::vector<CandidateMatch> scan_payload(ByteView payload) const {
    std::vector<CandidateMatch> out;
    if (filters_.empty()) return out;
    const std::size_t min_len = filters_.front().length;
    if (payload.size() < min_len) return out;
    const auto& family = filters_.front().filter.family();
    for (std::size_t o = 0; o + min_len <= payload.size(); ++o) {
      // One pass over the bytes from o yields g1 for every window length.
      Mixer g1_state(params_.seed_a);
      std::size_t end = o;
      for (const auto& lf : filters_) {
        if (o + lf.length > payload.size()) break;
        while (end < o + lf.length) g1_state.absorb(payload[end++]);
        const std::uint64_t g1 = g1_state.finish();
        if (!lf.filter.test_bit(family.first_index(g1))) continue;
        // g2 is only needed once the first probe hits.
        Mixer g2_state(params_.seed_b);
        g2_state.absorb(payload.subspan(o, lf.length));
        if (lf.filter.check(HashFamily::Digest{g1, g2_state.finish()}) == Membership::member)
          out.push_back({o, lf.length, std::nullopt});
      }
    }
    return out;
  }

  /// Keeps the candidates whose window is exactly a programmed pattern and
  /// labels them. Identical patterns report the id that was added first.
  std::vector<CandidateMatch> verify_candidates(ByteView payload, const std::vector<CandidateMatch>& candidates) const {
    std::vector<CandidateMatch> out;
    for (const auto& c : candidates) {
      if (c.length == 0 || c.offset > payload.size() || c.length > payload.size() - c.offset)
        throw Error(Errc::candidate_out_of_bounds,
                    "window (" + std::to_string(c.offset) + ", " + std::to_string(c.length) + ") outside payload of " +
                        std::to_string(payload.size()) + " bytes");
      const auto it = exact_index_.find(std::string(as_chars(payload.subspan(c.offset, c.length))));
      if (it != exact_index_.end()) out.push_back({c.offset, c.length, it->second});
    }
    return out;
  }

  /// Exact multi-pattern match over the whole payload with no Bloom stage:
  /// what a host sees when every packet is delivered to it.
  std::vector<CandidateMatch> exact_scan(ByteView payload) const {
    std::vector<CandidateMatch> out;
    for (const auto& hit : exact_.find_all(payload)) out.push_back({hit.offset, hit.length, exact_ids_[hit.pattern]});
    return out;
  }

  const AhoCorasick& exact_matcher() const noexcept { return exact_; }

  friend SignatureMatcher program_matcher(const SignatureSet& set, const BloomParams& params);
  friend SignatureMatcher matcher_from_filters(const SignatureSet& set, std::vector<LengthFilter> filters);

 private:
  void index_patterns(const SignatureSet& set) {
    for (const auto& sig : set.signatures()) {
      exact_index_.try_emplace(std::string(as_chars(sig.pattern)), sig.id);
      if (exact_.add(sig.pattern) == exact_ids_.size()) exact_ids_.push_back(sig.id);
    }
    exact_.compile();
    signature_count_ = set.size();
  }

  BloomParams params_;
  std::vector<LengthFilter> filters_;  // ascending length
  std::unordered_map<std::string, std::string> exact_index_;
  AhoCorasick exact_{};
  std::vector<std::string> exact_ids_;  // AhoCorasick pattern index -> id
  std::size_t signature_count_ = 0;
};

/// Programs one fresh filter per distinct length with that length's patterns.
inline SignatureMatcher program_matcher(const SignatureSet& set, const BloomParams& params) {
  if (set.empty()) throw Error(Errc::empty_set, "no signatures to program");
  params.validate();
  SignatureMatcher matcher;
  matcher.params_ = params;
  matcher.exact_ = AhoCorasick{};
  for (const auto& [len, members] : set.by_length()) {
    BloomFilter f(params);
    for (auto idx : members) f.add(set.signatures()[idx].pattern);
    matcher.filters_.push_back({len, std::move(f)});
  }
  matcher.index_patterns(set);
  return matcher;
}

/// Reassembles a matcher from persisted filters. The rule set supplies the
/// host's exact table and must agree with the filters on lengths and counts.
inline SignatureMatcher matcher_from_filters(const SignatureSet& set, std::vector<SignatureMatcher::LengthFilter> filters) {
  if (set.empty() || filters.empty()) throw Error(Errc::empty_set, "no signatures or filters");
  std::sort(filters.begin(), filters.end(), [](const auto& a, const auto& b) { return a.length < b.length; });
  const auto& params = filters.front().filter.params();
  if (filters.size() != set.by_length().size())
    throw Error(Errc::inconsistent_filters, std::to_string(filters.size()) + " filters for " +
                                                std::to_string(set.by_length().size()) + " pattern lengths");
  auto group = set.by_length().begin();
  for (const auto& lf : filters) {
    if (!(lf.filter.params() == params)) throw Error(Errc::inconsistent_filters, "filters disagree on parameters");
    if (lf.length != group->first)
      throw Error(Errc::inconsistent_filters, "no rules of length " + std::to_string(lf.length));
    if (lf.filter.count_programmed() != group->second.size())
      throw Error(Errc::inconsistent_filters, "filter for length " + std::to_string(lf.length) + " holds " +
                                                  std::to_string(lf.filter.count_programmed()) + " patterns, rules have " +
                                                  std::to_string(group->second.size()));
    ++group;
  }
  SignatureMatcher matcher;
  matcher.params_ = params;
  matcher.exact_ = AhoCorasick{};
  matcher.filters_ = std::move(filters);
  matcher.index_patterns(set);
  return matcher;
}

}  // namespace peic
