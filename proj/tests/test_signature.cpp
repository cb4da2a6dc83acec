#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "peic/analytics.hpp"
#include "peic/filter_image.hpp"
#include "peic/signature.hpp"

using namespace peic;
using peic::oracle::brute_force_scan;
using peic::oracle::random_bytes;
using peic::oracle::random_signatures;
using peic::oracle::to_hits;

namespace {

void expect_code(Errc code, std::optional<std::size_t> line, const auto& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    EXPECT_EQ(e.line(), line) << e.what();
  }
}

SignatureSet set_of(std::initializer_list<std::pair<const char*, const char*>> sigs) {
  SignatureSet s;
  for (auto [id, pat] : sigs) s.add({id, to_bytes(pat)});
  return s;
}

}  // namespace

TEST(LoadRules, HexAndAscii) {
  const auto s = load_rules("sig1,hex,474554\n");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.signatures()[0].id, "sig1");
  EXPECT_EQ(as_chars(s.signatures()[0].pattern), "GET");

  const auto t = load_rules("a,ascii,attack\n# comment\na2,ascii,attack\n");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.by_length().at(6).size(), 2u);
}

TEST(LoadRules, WhitespaceCommentsAndCommas) {
  const auto s = load_rules("\n   \n  # indented comment\r\nx,ascii,a,b c\r\ny , hex , DEADbeef \n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(as_chars(s.signatures()[0].pattern), "a,b c");
  EXPECT_EQ(s.signatures()[1].id, "y");
  EXPECT_EQ(s.signatures()[1].pattern, (Bytes{0xde, 0xad, 0xbe, 0xef}));
}

TEST(LoadRules, ErrorsCarryLineNumbers) {
  expect_code(Errc::bad_hex, 1, [] { load_rules("a,hex,4\n"); });
  expect_code(Errc::bad_hex, 2, [] { load_rules("ok,ascii,xx\nb,hex,zz\n"); });
  expect_code(Errc::duplicate_id, 3, [] { load_rules("a,ascii,one\n#\na,ascii,two\n"); });
  expect_code(Errc::pattern_length_out_of_range, 1, [] { load_rules("a,ascii,x\n"); });
  expect_code(Errc::pattern_length_out_of_range, 1, [] { load_rules("a,ascii," + std::string(65, 'q') + "\n"); });
  expect_code(Errc::malformed_line, 1, [] { load_rules("just-text\n"); });
  expect_code(Errc::malformed_line, 1, [] { load_rules("a,base64,QUJD\n"); });
  expect_code(Errc::malformed_line, 2, [] { load_rules("a,ascii,ok\n,ascii,ab\n"); });
  EXPECT_NO_THROW(load_rules("a,ascii," + std::string(64, 'q')));
}

TEST(ProgramMatcher, OneFilterPerLength) {
  const auto m = program_matcher(set_of({{"g", "GET"}, {"e", "EVIL"}}), {});
  ASSERT_EQ(m.filters().size(), 2u);
  EXPECT_EQ(m.filters()[0].length, 3u);
  EXPECT_EQ(m.filters()[1].length, 4u);
  EXPECT_EQ(m.filters()[0].filter.count_programmed(), 1u);
  EXPECT_EQ(m.filters()[1].filter.count_programmed(), 1u);
  EXPECT_EQ(m.lengths(), (std::vector<std::size_t>{3, 4}));
}

TEST(ProgramMatcher, RejectsEmptySet) {
  expect_code(Errc::empty_set, std::nullopt, [] { program_matcher(SignatureSet{}, {}); });
}

TEST(ProgramMatcher, EveryPatternIsMember) {
  std::mt19937_64 rng(8);
  const auto set = random_signatures(rng, 1000, 2, 64);
  const auto m = program_matcher(set, {});
  for (const auto& sig : set.signatures()) {
    const auto& lf = *std::find_if(m.filters().begin(), m.filters().end(),
                                   [&](const auto& f) { return f.length == sig.pattern.size(); });
    ASSERT_TRUE(lf.filter.contains(sig.pattern));
  }
  std::size_t total = 0;
  for (const auto& [len, idx] : set.by_length()) total += idx.size();
  EXPECT_EQ(total, set.size());
}

TEST(ScanPayload, ShortPayloadHasNoWindows) {
  const auto m = program_matcher(set_of({{"e", "EVIL"}, {"x", "XXXXXX"}}), {});
  EXPECT_TRUE(m.scan_payload(as_bytes("EVI")).empty());
  EXPECT_TRUE(m.scan_payload({}).empty());
  EXPECT_TRUE(SignatureMatcher{}.scan_payload(as_bytes("anything")).empty());
}

TEST(ScanPayload, ContainsEmbeddedPattern) {
  const auto m = program_matcher(set_of({{"get", "GET"}}), {});
  const auto c = m.scan_payload(as_bytes("xxGETxx"));
  EXPECT_NE(std::find(c.begin(), c.end(), CandidateMatch{2, 3, std::nullopt}), c.end());
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
  const auto v = m.verify_candidates(as_bytes("xxGETxx"), c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (CandidateMatch{2, 3, "get"}));
}

TEST(ScanPayload, EqualsPerWindowBloomCheck) {
  // The single-pass incremental scan must agree with querying each window
  // through the plain filter API.
  std::mt19937_64 rng(12);
  BloomParams dense{256, 2, 7, 8};  // small vector so hits are common
  for (int t = 0; t < 40; ++t) {
    const auto set = random_signatures(rng, 5 + rng() % 40, 2, 12);
    const auto m = program_matcher(set, dense);
    const auto payload = random_bytes(rng, rng() % 300);
    std::vector<CandidateMatch> expect;
    for (std::size_t o = 0; o < payload.size(); ++o)
      for (const auto& lf : m.filters())
        if (o + lf.length <= payload.size() && lf.filter.contains(ByteView(payload).subspan(o, lf.length)))
          expect.push_back({o, lf.length, std::nullopt});
    ASSERT_EQ(m.scan_payload(payload), expect);
  }
}

TEST(ScanPayload, Deterministic) {
  std::mt19937_64 rng(3);
  const auto set = random_signatures(rng, 200, 2, 8);
  const auto m = program_matcher(set, BloomParams{2048, 3, 1, 2});
  const auto p = random_bytes(rng, 1000);
  EXPECT_EQ(m.scan_payload(p), m.scan_payload(p));
}

TEST(ScanPayload, WindowFprNearClosedForm) {
  // One length, so every window probes the same filter; count candidates
  // over random payloads, which contain no pattern after exact filtering.
  std::mt19937_64 rng(21);
  const auto set = random_signatures(rng, 1500, 8, 8);
  const BloomParams params{16384, 4, kDefaultSeedA, kDefaultSeedB};
  const auto m = program_matcher(set, params);
  std::size_t windows = 0, hits = 0;
  while (windows < 200000) {
    const auto p = random_bytes(rng, 1000);
    ASSERT_TRUE(m.exact_scan(p).empty());
    windows += p.size() - 8 + 1;
    hits += m.scan_payload(p).size();
  }
  const double theory = fpr_theoretical(16384, 4, 1500).fpr;
  const double sigma = std::sqrt(theory * (1 - theory) / static_cast<double>(windows));
  EXPECT_NEAR(static_cast<double>(hits) / static_cast<double>(windows), theory, 4 * sigma);
}

TEST(VerifyCandidates, DropsFalsePositivesAndChecksBounds) {
  const auto m = program_matcher(set_of({{"get", "GET"}}), {});
  const auto payload = as_bytes("xxGETxxPUT");
  const std::vector<CandidateMatch> fake = {{7, 3, std::nullopt}, {2, 3, std::nullopt}};
  const auto v = m.verify_candidates(payload, fake);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].offset, 2u);
  expect_code(Errc::candidate_out_of_bounds, std::nullopt,
              [&] { m.verify_candidates(payload, {{8, 3, std::nullopt}}); });
  expect_code(Errc::candidate_out_of_bounds, std::nullopt,
              [&] { m.verify_candidates(payload, {{SIZE_MAX, 3, std::nullopt}}); });
}

TEST(VerifyCandidates, DuplicatePatternsReportFirstId) {
  const auto set = load_rules("first,ascii,attack\nsecond,ascii,attack\n");
  const auto m = program_matcher(set, {});
  EXPECT_EQ(m.filters()[0].filter.count_programmed(), 2u);
  const auto p = as_bytes("an attack!");
  const auto v = m.verify_candidates(p, m.scan_payload(p));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].signature_id, "first");
  EXPECT_EQ(m.exact_scan(p), v);
}

TEST(VerifyCandidates, MatchesBruteForceOracle) {
  std::mt19937_64 rng(500);
  for (int t = 0; t < 200; ++t) {
    const auto set = random_signatures(rng, 1 + rng() % 60, 2, 6);
    const auto m = program_matcher(set, BloomParams{1024, 3, rng() | 1, rng() & ~1ULL});
    auto payload = random_bytes(rng, rng() % 400);
    // Embed a few patterns, including overlapping ones.
    for (int e = 0; e < 4 && !payload.empty(); ++e) {
      const auto& pat = set.signatures()[rng() % set.size()].pattern;
      if (pat.size() > payload.size()) continue;
      std::copy(pat.begin(), pat.end(), payload.begin() + static_cast<std::ptrdiff_t>(rng() % (payload.size() - pat.size() + 1)));
    }
    const auto verified = m.verify_candidates(payload, m.scan_payload(payload));
    const auto oracle = brute_force_scan(set.signatures(), payload);
    ASSERT_EQ(to_hits(verified), oracle);
    ASSERT_EQ(to_hits(m.exact_scan(payload)), oracle);
  }
}

TEST(SignatureMatcher, ReloadedFiltersScanIdentically) {
  std::mt19937_64 rng(17);
  const auto set = random_signatures(rng, 300, 3, 10);
  const auto m = program_matcher(set, BloomParams{4096, 4, 10, 20});
  std::vector<SignatureMatcher::LengthFilter> reloaded;
  for (const auto& lf : m.filters()) reloaded.push_back({lf.length, deserialize_filter(serialize_filter(lf.filter))});
  std::reverse(reloaded.begin(), reloaded.end());
  const auto r = matcher_from_filters(set, reloaded);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_bytes(rng, rng() % 800);
    ASSERT_EQ(m.scan_payload(p), r.scan_payload(p));
  }
}

TEST(SignatureMatcher, RejectsFiltersThatDisagreeWithRules) {
  const auto set = set_of({{"a", "GET"}, {"b", "EVIL"}});
  const auto m = program_matcher(set, {});
  auto filters = m.filters();
  filters.pop_back();
  expect_code(Errc::inconsistent_filters, std::nullopt, [&] { matcher_from_filters(set, filters); });

  const auto other = program_matcher(set_of({{"a", "GET"}, {"b", "GET2"}, {"c", "GET3"}}), {});
  expect_code(Errc::inconsistent_filters, std::nullopt, [&] { matcher_from_filters(set, other.filters()); });
}
