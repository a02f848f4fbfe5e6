#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gsvq/compressor.hpp"

namespace gsvq {

// .nvqg container, version 1, all integers little-endian:
//   magic "NVQG" | version u16 | flags u16 (bit 0: has_sh)
//   splat_count u64
//   4 group records (s, r, c, sh): dim u16 | bits u8 | entries u32
//   4 codebooks, row-major float32
//   per splat: position (3 x f32) + opacity_raw (f32)
//   4 index streams, LSB-first at `bits` per index, each padded to a byte.

inline constexpr std::array<char, 4> kMagic{'N', 'V', 'Q', 'G'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint16_t kFlagHasSh = 1;
inline constexpr std::size_t kHeaderBytes = 4 + 2 + 2 + 8 + 4 * (2 + 1 + 4);

struct SizeReport {
    std::uint64_t header_bytes = 0;
    std::uint64_t codebook_bytes = 0; // all four codebooks
    std::uint64_t raw_bytes = 0;      // positions + opacities
    std::array<std::uint64_t, 4> stream_bytes{};
    std::uint64_t total_bytes = 0;
    std::uint64_t uncompressed_bytes = 0; // N x 59 x 4
    double ratio = 0.0;                   // uncompressed / total
};

// Serializes the cloud; returns the bytes written.
std::uint64_t encode(const QuantizedCloud& qcloud, const std::string& path);
std::vector<std::uint8_t> encode_bytes(const QuantizedCloud& qcloud);

// Exact inverse of encode. Throws FormatError with the offending byte offset:
// BadMagic, BadVersion, BadHeader, Truncated, IndexRange, BadValue.
QuantizedCloud decode(const std::string& path);
QuantizedCloud decode_bytes(std::span<const std::uint8_t> bytes);

// Closed-form size breakdown; totals equal the encoded file size exactly.
SizeReport size_report(const QuantizedCloud& qcloud);

// ceil(log2(entries)) for a power-of-two entry count.
std::uint8_t bits_for_entries(std::uint32_t entries);

} // namespace gsvq
