#pragma once

// Ethernet II / IPv4 / TCP / UDP decoding. Malformed input is a verdict
// (std::nullopt), never an exception.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>

#include "peic/bytes.hpp"

namespace peic {

struct RawFrame {
  Bytes bytes;
  std::uint32_t ts_sec = 0;
  std::uint32_t ts_usec = 0;
  std::uint32_t orig_len = 0;

  friend bool operator==(const RawFrame&, const RawFrame&) = default;
};

using MacAddress = std::array<std::uint8_t, 6>;

inline constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
inline constexpr std::uint16_t kEtherTypeArp = 0x0806;
inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;
inline constexpr std::size_t kEthernetHeaderLen = 14;

enum class TransportKind { tcp, udp };

struct LinkHeader {
  std::uint16_t ethertype = 0;
  MacAddress src_mac{};
  MacAddress dst_mac{};
};

struct NetHeader {
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint8_t protocol = 0;
  std::uint8_t header_len = 0;  // bytes, IHL * 4
  std::uint16_t fragment_offset = 0;  // in 8-byte units
};

struct TransportHeader {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  TransportKind kind = TransportKind::tcp;
};

/// Decoded headers plus the payload as an (offset, length) slice of the frame.
struct ParsedPacket {
  LinkHeader link;
  std::optional<NetHeader> net;
  std::optional<TransportHeader> transport;
  std::size_t payload_offset = 0;
  std::size_t payload_length = 0;

  ByteView payload(const RawFrame& frame) const noexcept {
    return ByteView(frame.bytes).subspan(payload_offset, payload_length);
  }
};

/// std::nullopt means NON_PARSEABLE.
inline std::optional<ParsedPacket> parse_packet(ByteView frame) noexcept {
  if (frame.size() < kEthernetHeaderLen) return std::nullopt;

  ParsedPacket pkt;
  std::copy_n(frame.begin(), 6, pkt.link.dst_mac.begin());
  std::copy_n(frame.begin() + 6, 6, pkt.link.src_mac.begin());
  pkt.link.ethertype = be::get<std::uint16_t>(frame, 12);
  pkt.payload_offset = kEthernetHeaderLen;
  pkt.payload_length = frame.size() - kEthernetHeaderLen;
  if (pkt.link.ethertype != kEtherTypeIpv4) return pkt;

  const std::size_t ip_at = kEthernetHeaderLen;
  const std::size_t avail = frame.size() - ip_at;
  if (avail < 20) return std::nullopt;
  const std::uint8_t ver_ihl = frame[ip_at];
  if ((ver_ihl >> 4) != 4) return std::nullopt;
  const std::size_t ihl = static_cast<std::size_t>(ver_ihl & 0x0f) * 4;
  if (ihl < 20 || ihl > avail) return std::nullopt;
  const std::size_t total_len = be::get<std::uint16_t>(frame, ip_at + 2);
  // Shorter frames than the datagram claims are truncated captures; longer
  // ones carry link-layer padding that is not part of the payload.
  if (total_len < ihl || total_len > avail) return std::nullopt;

  NetHeader net;
  net.header_len = static_cast<std::uint8_t>(ihl);
  net.fragment_offset = be::get<std::uint16_t>(frame, ip_at + 6) & 0x1fff;
  net.protocol = frame[ip_at + 9];
  net.src_ip = be::get<std::uint32_t>(frame, ip_at + 12);
  net.dst_ip = be::get<std::uint32_t>(frame, ip_at + 16);
  pkt.net = net;

  const std::size_t l4_at = ip_at + ihl;
  const std::size_t ip_end = ip_at + total_len;
  pkt.payload_offset = l4_at;
  pkt.payload_length = ip_end - l4_at;

  // Non-first fragments have no transport header; scan their bytes as-is.
  if (net.fragment_offset != 0) return pkt;

  const std::size_t l4_avail = ip_end - l4_at;
  if (net.protocol == kProtoTcp) {
    if (l4_avail < 20) return std::nullopt;
    const std::size_t doff = static_cast<std::size_t>(frame[l4_at + 12] >> 4) * 4;
    if (doff < 20 || doff > l4_avail) return std::nullopt;
    pkt.transport = TransportHeader{be::get<std::uint16_t>(frame, l4_at), be::get<std::uint16_t>(frame, l4_at + 2),
                                    TransportKind::tcp};
    pkt.payload_offset = l4_at + doff;
    pkt.payload_length = l4_avail - doff;
  } else if (net.protocol == kProtoUdp) {
    if (l4_avail < 8) return std::nullopt;
    const std::size_t udp_len = be::get<std::uint16_t>(frame, l4_at + 4);
    if (udp_len < 8 || udp_len > l4_avail) return std::nullopt;
    pkt.transport = TransportHeader{be::get<std::uint16_t>(frame, l4_at), be::get<std::uint16_t>(frame, l4_at + 2),
                                    TransportKind::udp};
    pkt.payload_offset = l4_at + 8;
    pkt.payload_length = udp_len - 8;
  }
  return pkt;
}

inline std::optional<ParsedPacket> parse_packet(const RawFrame& frame) noexcept { return parse_packet(ByteView(frame.bytes)); }

/// RFC 1071 ones-complement sum, used when synthesizing frames.
inline std::uint16_t internet_checksum(ByteView data, std::uint32_t initial = 0) noexcept {
  std::uint32_t sum = initial;
  std::size_t i = 0;
  for (; i + 1 < data.size(); i += 2) sum += static_cast<std::uint32_t>((data[i] << 8) | data[i + 1]);
  if (i < data.size()) sum += static_cast<std::uint32_t>(data[i] << 8);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

}  // namespace peic
