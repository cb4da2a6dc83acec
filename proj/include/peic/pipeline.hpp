#pragma once

// Software model of the filtering card's data path: parse, Bloom-match,
// selectively forward to the host. Each forwarded packet is one host
// interrupt.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "peic/csv.hpp"
#include "peic/packet.hpp"
#include "peic/pcap.hpp"
#include "peic/signature.hpp"

namespace peic {

enum class Verdict { forward, drop };
enum class Reason { match_candidate, non_parseable, clean };

constexpr std::string_view to_string(Verdict v) noexcept { return v == Verdict::forward ? "FORWARD" : "DROP"; }

constexpr std::string_view to_string(Reason r) noexcept {
  switch (r) {
    case Reason::match_candidate: return "MATCH_CANDIDATE";
    case Reason::non_parseable: return "NON_PARSEABLE";
    case Reason::clean: return "CLEAN";
  }
  return "?";
}

struct Decision {
  Verdict verdict = Verdict::drop;
  Reason reason = Reason::clean;

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct PacketOutcome {
  Decision decision;
  std::size_t candidates = 0;
  std::size_t payload_len = 0;
  /// Exact matches found by the host; empty for dropped packets.
  std::vector<CandidateMatch> verified;
};

/// Bytes the host inspects for a frame: the decoded payload, or the whole
/// frame when it could not be decoded.
inline ByteView host_view(const RawFrame& frame, const std::optional<ParsedPacket>& parsed) noexcept {
  return parsed ? parsed->payload(frame) : ByteView(frame.bytes);
}

inline PacketOutcome process_packet(const SignatureMatcher& matcher, const RawFrame& frame) {
  PacketOutcome out;
  const auto parsed = parse_packet(frame);
  const ByteView view = host_view(frame, parsed);
  out.payload_len = view.size();
  if (!parsed) {
    // Fail open: the card cannot judge it, so the host must.
    out.decision = {Verdict::forward, Reason::non_parseable};
    out.verified = matcher.exact_scan(view);
    return out;
  }
  const auto candidates = matcher.scan_payload(view);
  out.candidates = candidates.size();
  if (candidates.empty()) {
    out.decision = {Verdict::drop, Reason::clean};
    return out;
  }
  out.decision = {Verdict::forward, Reason::match_candidate};
  out.verified = matcher.verify_candidates(view, candidates);
  return out;
}

/// Filter FIFO occupancy, kept for reporting only: overflow is counted but
/// never causes a packet to be discarded.
struct FifoModel {
  std::size_t capacity = 64;
  /// Packets the host drains per packet the card processes.
  double drain_per_packet = 1.0;
  std::size_t depth = 0;
  std::size_t peak_depth = 0;
  std::uint64_t overflow_count = 0;
  double drain_credit = 0.0;

  void enqueue() noexcept {
    if (depth >= capacity) {
      ++overflow_count;
      return;
    }
    ++depth;
    peak_depth = std::max(peak_depth, depth);
  }

  void tick() noexcept {
    drain_credit += drain_per_packet;
    while (drain_credit >= 1.0 && depth > 0) {
      --depth;
      drain_credit -= 1.0;
    }
    if (depth == 0 && drain_credit > 1.0) drain_credit = 1.0;
  }
};

struct PipelineStats {
  std::uint64_t total = 0;
  std::uint64_t forwarded = 0;  // == host interrupts
  std::uint64_t dropped = 0;
  std::uint64_t true_matches = 0;
  std::uint64_t false_positive_forwards = 0;
  std::uint64_t non_parseable_forwards = 0;
  std::uint64_t bytes_total = 0;
  std::uint64_t bytes_forwarded = 0;

  std::uint64_t interrupts() const noexcept { return forwarded; }

  double percent_analyzed() const noexcept {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(forwarded) / static_cast<double>(total);
  }

  bool consistent() const noexcept {
    return total == forwarded + dropped && forwarded == true_matches + false_positive_forwards + non_parseable_forwards &&
           bytes_forwarded <= bytes_total;
  }

  void record(const PacketOutcome& o, std::size_t frame_bytes) noexcept {
    ++total;
    bytes_total += frame_bytes;
    if (o.decision.verdict == Verdict::drop) {
      ++dropped;
      return;
    }
    ++forwarded;
    bytes_forwarded += frame_bytes;
    if (o.decision.reason == Reason::non_parseable) ++non_parseable_forwards;
    else if (o.verified.empty()) ++false_positive_forwards;
    else ++true_matches;
  }

  static std::vector<std::string> csv_header() {
    return {"total", "forwarded", "dropped", "true_matches", "false_positive_forwards", "non_parseable_forwards",
            "bytes_total", "bytes_forwarded", "percent_analyzed"};
  }

  std::vector<std::string> csv_fields() const {
    return {csv::num(total), csv::num(forwarded), csv::num(dropped), csv::num(true_matches),
            csv::num(false_positive_forwards), csv::num(non_parseable_forwards), csv::num(bytes_total),
            csv::num(bytes_forwarded), csv::num(percent_analyzed())};
  }
};

/// One row of the optional decision log.
struct DecisionRecord {
  std::size_t index = 0;
  Decision decision;
  std::size_t candidates = 0;
  std::size_t verified = 0;
  std::size_t payload_len = 0;

  static std::vector<std::string> csv_header() { return {"index", "verdict", "reason", "candidates", "verified", "payload_len"}; }

  std::vector<std::string> csv_fields() const {
    return {csv::num(index), std::string(to_string(decision.verdict)), std::string(to_string(decision.reason)),
            csv::num(candidates), csv::num(verified), csv::num(payload_len)};
  }
};

struct TraceRun {
  PipelineStats stats;
  FifoModel fifo;
  Trace forwarded;
  std::vector<DecisionRecord> log;
  /// Host-verified matches per input packet (empty when dropped).
  std::vector<std::vector<CandidateMatch>> detections;
};

/// Processes frames in file order. Forwarded frames are copied unmodified.
inline TraceRun run_trace(const SignatureMatcher& matcher, const Trace& trace, FifoModel fifo = {}) {
  TraceRun run;
  run.forwarded.link_type = trace.link_type;
  run.log.reserve(trace.size());
  run.detections.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& frame = trace.frames[i];
    auto outcome = process_packet(matcher, frame);
    run.stats.record(outcome, frame.bytes.size());
    if (outcome.decision.verdict == Verdict::forward) {
      fifo.enqueue();
      run.forwarded.frames.push_back(frame);
    }
    fifo.tick();
    run.log.push_back({i, outcome.decision, outcome.candidates, outcome.verified.size(), outcome.payload_len});
    run.detections.push_back(std::move(outcome.verified));
  }
  run.fifo = fifo;
  return run;
}

struct BaselineReport {
  TraceRun filtered;
  /// Exact matches per packet with every packet delivered to the host.
  std::vector<std::vector<CandidateMatch>> unfiltered;
  bool equivalent = false;
  std::size_t mismatched_packets = 0;
  std::size_t detected_packets_unfiltered = 0;
  std::size_t detected_packets_filtered = 0;
  std::size_t detections_unfiltered = 0;
  std::size_t detections_filtered = 0;
  /// 1 - forwarded/total.
  double reduction = 0.0;
};

/// Runs the trace with and without the card filter and compares what
/// the host detects.
inline BaselineReport compare_baseline(const SignatureMatcher& matcher, const Trace& trace, FifoModel fifo = {}) {
  BaselineReport rep;
  rep.filtered = run_trace(matcher, trace, fifo);
  rep.unfiltered.reserve(trace.size());
  for (const auto& frame : trace.frames) {
    const auto parsed = parse_packet(frame);
    rep.unfiltered.push_back(matcher.exact_scan(host_view(frame, parsed)));
  }
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& a = rep.unfiltered[i];
    const auto& b = rep.filtered.detections[i];
    if (a != b) ++rep.mismatched_packets;
    rep.detections_unfiltered += a.size();
    rep.detections_filtered += b.size();
    rep.detected_packets_unfiltered += a.empty() ? 0 : 1;
    rep.detected_packets_filtered += b.empty() ? 0 : 1;
  }
  rep.equivalent = rep.mismatched_packets == 0;
  const auto& s = rep.filtered.stats;
  rep.reduction = s.total == 0 ? 0.0 : 1.0 - static_cast<double>(s.forwarded) / static_cast<double>(s.total);
  return rep;
}

}  // namespace peic
