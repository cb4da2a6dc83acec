#pragma once

// FilterImage: the persisted form of a programmed filter, all fields
// little-endian:
//
//   "PEIC" | u16 version=1 | u16 k | u64 m | u64 seed_a | u64 seed_b
//   | u64 count_programmed | ceil(m/8) vector bytes (LSB-first) | u32 crc32
//
// The CRC (IEEE 802.3) covers every byte before it.

#include <array>
#include <cstdint>

#include <boost/crc.hpp>

#include "peic/bloom.hpp"
#include "peic/bytes.hpp"
#include "peic/error.hpp"

namespace peic {

inline constexpr std::array<std::uint8_t, 4> kImageMagic = {'P', 'E', 'I', 'C'};
inline constexpr std::uint16_t kImageVersion = 1;
inline constexpr std::size_t kImageHeaderSize = 40;

inline std::uint32_t crc32(ByteView data) noexcept {
  boost::crc_32_type crc;
  crc.process_bytes(data.data(), data.size());
  return crc.checksum();
}

inline Bytes serialize_filter(const BloomFilter& filter) {
  const auto& p = filter.params();
  const std::uint64_t vector_bytes = (p.m + 7) / 8;
  Bytes out(kImageMagic.begin(), kImageMagic.end());
  out.reserve(kImageHeaderSize + vector_bytes + 4);
  le::put<std::uint16_t>(out, kImageVersion);
  le::put<std::uint16_t>(out, static_cast<std::uint16_t>(p.k));
  le::put<std::uint64_t>(out, p.m);
  le::put<std::uint64_t>(out, p.seed_a);
  le::put<std::uint64_t>(out, p.seed_b);
  le::put<std::uint64_t>(out, filter.count_programmed());
  const auto& words = filter.words();
  for (std::uint64_t i = 0; i < vector_bytes; ++i)
    out.push_back(static_cast<std::uint8_t>(words[i / 8] >> (8 * (i % 8))));
  le::put<std::uint32_t>(out, crc32(out));
  return out;
}

inline BloomFilter deserialize_filter(ByteView image) {
  if (image.size() < kImageMagic.size()) throw Error(Errc::truncated_image, "image shorter than magic");
  if (!std::equal(kImageMagic.begin(), kImageMagic.end(), image.begin())) throw Error(Errc::bad_magic, "not a filter image");
  if (image.size() < kImageHeaderSize) throw Error(Errc::truncated_image, "image shorter than header");
  const auto version = le::get<std::uint16_t>(image, 4);
  if (version != kImageVersion)
    throw Error(Errc::version_mismatch, "image version " + std::to_string(version) + ", expected " + std::to_string(kImageVersion));

  BloomParams p;
  p.k = le::get<std::uint16_t>(image, 6);
  p.m = le::get<std::uint64_t>(image, 8);
  p.seed_a = le::get<std::uint64_t>(image, 16);
  p.seed_b = le::get<std::uint64_t>(image, 24);
  const auto count = le::get<std::uint64_t>(image, 32);

  // Guard the size arithmetic before trusting m.
  const std::uint64_t available = image.size() - kImageHeaderSize;
  if (p.m / 8 > available) throw Error(Errc::truncated_image, "vector extends past end of image");
  const std::uint64_t vector_bytes = (p.m + 7) / 8;
  const std::uint64_t total = kImageHeaderSize + vector_bytes + 4;
  if (image.size() < total) throw Error(Errc::truncated_image, "vector or checksum missing");
  if (image.size() > total) throw Error(Errc::trailing_data, "bytes after checksum");

  const auto stored = le::get<std::uint32_t>(image, total - 4);
  if (stored != crc32(image.first(total - 4))) throw Error(Errc::checksum_mismatch, "crc32 does not match contents");

  std::vector<std::uint64_t> words((p.m + 63) / 64, 0);
  for (std::uint64_t i = 0; i < vector_bytes; ++i)
    words[i / 8] |= static_cast<std::uint64_t>(image[kImageHeaderSize + i]) << (8 * (i % 8));
  return BloomFilter::restore(p, std::move(words), count);
}

}  // namespace peic
