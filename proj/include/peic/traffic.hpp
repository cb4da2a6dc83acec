#pragma once

// Deterministic synthetic traffic: Ethernet/IPv4/TCP frames with uniformly
// random payloads, a chosen fraction of which carry one embedded signature.
// The manifest is exact ground truth because background payloads are
// resampled until they contain no programmed pattern.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "peic/aho_corasick.hpp"
#include "peic/csv.hpp"
#include "peic/error.hpp"
#include "peic/packet.hpp"
#include "peic/pcap.hpp"
#include "peic/signature.hpp"

namespace peic {

inline constexpr std::size_t kMaxPayloadLen = 1400;
inline constexpr std::uint32_t kTraceEpoch = 1'190'000'000;  // first frame timestamp (seconds)
inline constexpr std::uint32_t kFrameSpacingUsec = 100;

struct TrafficSpec {
  std::size_t packet_count = 1000;
  double attack_fraction = 0.0;
  std::size_t payload_min = 40;
  std::size_t payload_max = kMaxPayloadLen;
  std::uint64_t seed = 1;
  SignatureSet signatures;
  /// Resampling budget per background packet before giving up.
  std::size_t max_background_attempts = 10000;

  /// floor(attack_fraction * packet_count), tolerant of binary rounding
  /// (0.29 * 100 is 28.999999999999996).
  std::size_t attack_count() const noexcept {
    return static_cast<std::size_t>(std::floor(attack_fraction * static_cast<double>(packet_count) + 1e-9));
  }

  void validate() const {
    if (!(attack_fraction >= 0.0 && attack_fraction <= 1.0))
      throw Error(Errc::invalid_spec, "attack fraction must lie in [0, 1]");
    if (payload_min > payload_max) throw Error(Errc::invalid_spec, "payload min exceeds max");
    if (payload_max > kMaxPayloadLen)
      throw Error(Errc::invalid_spec, "payload max exceeds " + std::to_string(kMaxPayloadLen) + " bytes");
    if (attack_count() > 0) {
      if (signatures.empty()) throw Error(Errc::empty_signature_set, "attack packets requested without signatures");
      for (const auto& sig : signatures.signatures())
        if (sig.pattern.size() > payload_max)
          throw Error(Errc::invalid_spec, "signature '" + sig.id + "' longer than payload max");
    }
  }
};

struct ManifestRecord {
  std::size_t index = 0;
  bool is_attack = false;
  std::optional<std::string> signature_id;
  std::optional<std::size_t> embed_offset;  // offset into the TCP payload

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;

  static std::vector<std::string> csv_header() { return {"index", "is_attack", "signature_id", "embed_offset"}; }

  std::vector<std::string> csv_fields() const {
    return {csv::num(index), is_attack ? "1" : "0", signature_id.value_or(""),
            embed_offset ? csv::num(*embed_offset) : std::string()};
  }
};

struct Manifest {
  std::vector<ManifestRecord> records;

  std::size_t attack_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.is_attack; }));
  }

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline std::string write_manifest(const Manifest& m) { return emit_csv(m.records); }

struct FrameAddressing {
  MacAddress src_mac{0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
  MacAddress dst_mac{0x02, 0x00, 0x00, 0x00, 0x00, 0x02};
  std::uint32_t src_ip = 0x0a000001;
  std::uint32_t dst_ip = 0x0a000002;
  std::uint16_t src_port = 40000;
  std::uint16_t dst_port = 80;
  std::uint32_t seq = 0;
};

/// Ethernet II + 20-byte IPv4 + 20-byte TCP (PSH|ACK) around payload, with
/// valid IPv4 and TCP checksums.
inline Bytes build_tcp_frame(const FrameAddressing& a, ByteView payload, std::uint16_t ip_id = 0) {
  Bytes f;
  f.reserve(kEthernetHeaderLen + 40 + payload.size());
  f.insert(f.end(), a.dst_mac.begin(), a.dst_mac.end());
  f.insert(f.end(), a.src_mac.begin(), a.src_mac.end());
  be::put<std::uint16_t>(f, kEtherTypeIpv4);

  const std::size_t ip_at = f.size();
  const auto total_len = static_cast<std::uint16_t>(40 + payload.size());
  f.push_back(0x45);
  f.push_back(0x00);
  be::put<std::uint16_t>(f, total_len);
  be::put<std::uint16_t>(f, ip_id);
  be::put<std::uint16_t>(f, 0x4000);  // DF
  f.push_back(64);
  f.push_back(kProtoTcp);
  be::put<std::uint16_t>(f, 0);
  be::put<std::uint32_t>(f, a.src_ip);
  be::put<std::uint32_t>(f, a.dst_ip);
  const auto ip_sum = internet_checksum(ByteView(f).subspan(ip_at, 20));
  f[ip_at + 10] = static_cast<std::uint8_t>(ip_sum >> 8);
  f[ip_at + 11] = static_cast<std::uint8_t>(ip_sum);

  const std::size_t tcp_at = f.size();
  be::put<std::uint16_t>(f, a.src_port);
  be::put<std::uint16_t>(f, a.dst_port);
  be::put<std::uint32_t>(f, a.seq);
  be::put<std::uint32_t>(f, 0);  // ack
  f.push_back(0x50);             // data offset 5
  f.push_back(0x18);             // PSH|ACK
  be::put<std::uint16_t>(f, 65535);
  be::put<std::uint16_t>(f, 0);  // checksum
  be::put<std::uint16_t>(f, 0);  // urgent
  f.insert(f.end(), payload.begin(), payload.end());

  const auto tcp_len = static_cast<std::uint32_t>(f.size() - tcp_at);
  std::uint32_t pseudo = (a.src_ip >> 16) + (a.src_ip & 0xffff) + (a.dst_ip >> 16) + (a.dst_ip & 0xffff) + kProtoTcp + tcp_len;
  const auto tcp_sum = internet_checksum(ByteView(f).subspan(tcp_at), pseudo);
  f[tcp_at + 16] = static_cast<std::uint8_t>(tcp_sum >> 8);
  f[tcp_at + 17] = static_cast<std::uint8_t>(tcp_sum);
  return f;
}

struct GeneratedTraffic {
  Trace trace;
  Manifest manifest;
};

inline GeneratedTraffic generate_trace(const TrafficSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&rng](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };

  AhoCorasick exact;
  for (const auto& sig : spec.signatures.signatures()) exact.add(sig.pattern);
  exact.compile();

  // Choose which packet indices carry attacks.
  std::vector<std::size_t> order(spec.packet_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> attack(spec.packet_count, false);
  for (std::size_t i = 0; i < spec.attack_count(); ++i) attack[order[i]] = true;

  GeneratedTraffic out;
  out.trace.frames.reserve(spec.packet_count);
  out.manifest.records.reserve(spec.packet_count);
  std::uniform_int_distribution<int> byte_dist(0, 255);
  auto fill_random = [&](Bytes& payload) {
    for (auto& b : payload) b = static_cast<std::uint8_t>(byte_dist(rng));
  };

  for (std::size_t i = 0; i < spec.packet_count; ++i) {
    FrameAddressing addr;
    addr.src_ip = 0x0a000000u | static_cast<std::uint32_t>(uniform(1, 0xfffffe));
    addr.dst_ip = 0xc0a80000u | static_cast<std::uint32_t>(uniform(1, 0xfffe));
    addr.src_port = static_cast<std::uint16_t>(uniform(1024, 65535));
    addr.dst_port = static_cast<std::uint16_t>(uniform(1, 1023));
    addr.seq = static_cast<std::uint32_t>(rng());

    ManifestRecord rec;
    rec.index = i;
    Bytes payload;
    if (attack[i]) {
      const auto& sig = spec.signatures.signatures()[uniform(0, spec.signatures.size() - 1)];
      const std::size_t len = uniform(std::max(spec.payload_min, sig.pattern.size()), spec.payload_max);
      payload.resize(len);
      fill_random(payload);
      const std::size_t at = uniform(0, len - sig.pattern.size());
      std::copy(sig.pattern.begin(), sig.pattern.end(), payload.begin() + static_cast<std::ptrdiff_t>(at));
      rec.is_attack = true;
      rec.signature_id = sig.id;
      rec.embed_offset = at;
    } else {
      payload.resize(uniform(spec.payload_min, spec.payload_max));
      std::size_t attempts = 0;
      do {
        if (++attempts > spec.max_background_attempts)
          throw Error(Errc::invalid_spec, "cannot draw a clean background payload; signatures too short or too many");
        fill_random(payload);
      } while (exact.contains_any(payload));
    }

    auto frame = make_frame(build_tcp_frame(addr, payload, static_cast<std::uint16_t>(i)));
    const std::uint64_t t = static_cast<std::uint64_t>(i) * kFrameSpacingUsec;
    frame.ts_sec = kTraceEpoch + static_cast<std::uint32_t>(t / 1'000'000);
    frame.ts_usec = static_cast<std::uint32_t>(t % 1'000'000);
    out.trace.frames.push_back(std::move(frame));
    out.manifest.records.push_back(std::move(rec));
  }
  return out;
}

/// Random interleaving that keeps each input's internal order. Each step
/// draws from a with probability remaining(a) / remaining(a + b).
inline Trace mix_traces(const Trace& a, const Trace& b, std::uint64_t seed) {
  if (a.link_type != b.link_type) throw Error(Errc::link_type_mismatch, "cannot mix traces of different link types");
  Trace out;
  out.link_type = a.link_type;
  out.frames.reserve(a.size() + b.size());
  std::mt19937_64 rng(seed);
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() || ib < b.size()) {
    const std::size_t left_a = a.size() - ia, left_b = b.size() - ib;
    const bool take_a = left_b == 0 || (left_a > 0 && std::uniform_int_distribution<std::size_t>(1, left_a + left_b)(rng) <= left_a);
    out.frames.push_back(take_a ? a.frames[ia++] : b.frames[ib++]);
  }
  return out;
}

}  // namespace peic
