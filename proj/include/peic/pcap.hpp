#pragma once

// Classic libpcap capture files (version 2.4, Ethernet link type only).

#include <cstdint>
#include <vector>

#include "peic/bytes.hpp"
#include "peic/error.hpp"
#include "peic/packet.hpp"

namespace peic {

inline constexpr std::uint32_t kPcapMagic = 0xA1B2C3D4;
inline constexpr std::uint32_t kPcapMagicSwapped = 0xD4C3B2A1;
inline constexpr std::uint32_t kLinkTypeEthernet = 1;
inline constexpr std::uint32_t kPcapSnapLen = 65535;
inline constexpr std::size_t kPcapGlobalHeaderLen = 24;
inline constexpr std::size_t kPcapRecordHeaderLen = 16;

/// Frames in file order. Timestamps are not required to be monotone.
struct Trace {
  std::vector<RawFrame> frames;
  std::uint32_t link_type = kLinkTypeEthernet;

  std::size_t size() const noexcept { return frames.size(); }
  bool empty() const noexcept { return frames.empty(); }

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Wraps bytes as a frame captured in full.
inline RawFrame make_frame(Bytes bytes, std::uint32_t ts_sec = 0, std::uint32_t ts_usec = 0) {
  RawFrame f;
  f.orig_len = static_cast<std::uint32_t>(bytes.size());
  f.bytes = std::move(bytes);
  f.ts_sec = ts_sec;
  f.ts_usec = ts_usec;
  return f;
}

inline Trace read_pcap(ByteView file) {
  if (file.size() < 4) throw Error(Errc::bad_magic, "file shorter than pcap magic");
  const auto magic = le::get<std::uint32_t>(file, 0);
  bool swapped;
  if (magic == kPcapMagic) swapped = false;
  else if (magic == kPcapMagicSwapped) swapped = true;
  else throw Error(Errc::bad_magic, "not a classic pcap file");
  if (file.size() < kPcapGlobalHeaderLen) throw Error(Errc::truncated_record, "global header truncated");

  auto u32 = [&](std::size_t at) { return swapped ? be::get<std::uint32_t>(file, at) : le::get<std::uint32_t>(file, at); };

  Trace trace;
  trace.link_type = u32(20);
  if (trace.link_type != kLinkTypeEthernet)
    throw Error(Errc::unsupported_link_type, "link type " + std::to_string(trace.link_type));

  std::size_t at = kPcapGlobalHeaderLen;
  while (at < file.size()) {
    if (file.size() - at < kPcapRecordHeaderLen)
      throw Error(Errc::truncated_record, "record header truncated at byte " + std::to_string(at));
    RawFrame f;
    f.ts_sec = u32(at);
    f.ts_usec = u32(at + 4);
    const std::uint32_t incl = u32(at + 8);
    f.orig_len = u32(at + 12);
    at += kPcapRecordHeaderLen;
    if (file.size() - at < incl)
      throw Error(Errc::truncated_record, "record declares " + std::to_string(incl) + " bytes, " +
                                              std::to_string(file.size() - at) + " remain");
    f.bytes.assign(file.begin() + static_cast<std::ptrdiff_t>(at), file.begin() + static_cast<std::ptrdiff_t>(at + incl));
    at += incl;
    trace.frames.push_back(std::move(f));
  }
  return trace;
}

/// Canonical encoding: native magic written little-endian, snaplen 65535.
inline Bytes write_pcap(const Trace& trace) {
  Bytes out;
  out.reserve(kPcapGlobalHeaderLen);
  le::put<std::uint32_t>(out, kPcapMagic);
  le::put<std::uint16_t>(out, 2);
  le::put<std::uint16_t>(out, 4);
  le::put<std::int32_t>(out, 0);   // thiszone
  le::put<std::uint32_t>(out, 0);  // sigfigs
  le::put<std::uint32_t>(out, kPcapSnapLen);
  le::put<std::uint32_t>(out, trace.link_type);
  for (const auto& f : trace.frames) {
    le::put<std::uint32_t>(out, f.ts_sec);
    le::put<std::uint32_t>(out, f.ts_usec);
    le::put<std::uint32_t>(out, static_cast<std::uint32_t>(f.bytes.size()));
    le::put<std::uint32_t>(out, f.orig_len);
    out.insert(out.end(), f.bytes.begin(), f.bytes.end());
  }
  return out;
}

}  // namespace peic
