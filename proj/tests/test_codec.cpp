#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gsvq/codec.hpp"
#include "gsvq/errors.hpp"
#include "test_util.hpp"

using namespace gsvq;

namespace {

Codebook filled_codebook(std::mt19937_64& rng, std::uint32_t entries, std::uint32_t dim) {
    std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
    Codebook cb = Codebook::zeros(entries, dim);
    for (auto& v : cb.vectors) v = dist(rng);
    return cb;
}

QuantizedCloud random_qcloud(std::mt19937_64& rng, std::size_t n,
                             std::array<std::uint32_t, 4> entries) {
    std::uniform_real_distribution<float> dist(-5.0f, 5.0f);
    QuantizedCloud qc;
    qc.cb_s = filled_codebook(rng, entries[0], 3);
    qc.cb_r = filled_codebook(rng, entries[1], 4);
    qc.cb_c = filled_codebook(rng, entries[2], 3);
    qc.cb_sh = filled_codebook(rng, entries[3], 45);
    qc.positions.resize(n);
    qc.opacity_raw.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        qc.positions[i] = {dist(rng), dist(rng), dist(rng)};
        qc.opacity_raw[i] = dist(rng);
    }
    for (int g = 0; g < 4; ++g) {
        auto& idx = qc.indices(static_cast<AttrGroup>(g));
        idx.resize(n);
        for (auto& k : idx) k = static_cast<std::uint32_t>(rng() % entries[g]);
    }
    return qc;
}

// Test-local LSB-first packer, written independently of the codec.
std::vector<std::uint8_t> reference_pack(const std::vector<std::uint32_t>& values, int bits) {
    std::vector<std::uint8_t> out((values.size() * bits + 7) / 8, 0);
    std::size_t bitpos = 0;
    for (const std::uint32_t v : values) {
        for (int b = 0; b < bits; ++b) {
            if ((v >> b) & 1u) out[bitpos / 8] |= static_cast<std::uint8_t>(1u << (bitpos % 8));
            ++bitpos;
        }
    }
    return out;
}

} // namespace

TEST(BitsForEntries, PowersOfTwo) {
    EXPECT_EQ(bits_for_entries(1), 0);
    EXPECT_EQ(bits_for_entries(2), 1);
    EXPECT_EQ(bits_for_entries(512), 9);
    EXPECT_EQ(bits_for_entries(4096), 12);
    EXPECT_EQ(bits_for_entries(16384), 14);
}

TEST(Encode, TwoBitStreamMatchesReferenceByte) {
    std::mt19937_64 rng(50);
    QuantizedCloud qc = random_qcloud(rng, 3, {4, 2, 2, 2});
    qc.idx_s = {3, 1, 2};
    const auto bytes = encode_bytes(qc);

    const std::size_t codebook_bytes = (4 * 3 + 2 * 4 + 2 * 3 + 2 * 45) * sizeof(float);
    const std::size_t stream_s_offset = kHeaderBytes + codebook_bytes + 3 * 16;
    ASSERT_GT(bytes.size(), stream_s_offset);
    EXPECT_EQ(bytes[stream_s_offset], 0x27); // LSB-first: 3, then 1, then 2
}

TEST(Encode, StreamsMatchReferencePacker) {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 10; ++trial) {
        const std::array<std::uint32_t, 4> entries{
            std::uint32_t{1} << (1 + rng() % 14), std::uint32_t{1} << (1 + rng() % 14),
            std::uint32_t{1} << (1 + rng() % 12), std::uint32_t{1} << (1 + rng() % 12)};
        const std::size_t n = 1 + rng() % 50;
        const QuantizedCloud qc = random_qcloud(rng, n, entries);
        const auto bytes = encode_bytes(qc);

        std::size_t offset = kHeaderBytes;
        for (int g = 0; g < 4; ++g) {
            offset += std::size_t(entries[g]) * kGroupDims[g] * sizeof(float);
        }
        offset += n * 16;
        for (int g = 0; g < 4; ++g) {
            const auto& idx = qc.indices(static_cast<AttrGroup>(g));
            const auto want = reference_pack(idx, bits_for_entries(entries[g]));
            ASSERT_LE(offset + want.size(), bytes.size());
            for (std::size_t i = 0; i < want.size(); ++i) {
                EXPECT_EQ(bytes[offset + i], want[i]) << "group " << g << " byte " << i;
            }
            offset += want.size();
        }
        EXPECT_EQ(offset, bytes.size());
    }
}

TEST(Encode, OneSplatAt16kLayout) {
    std::mt19937_64 rng(52);
    const QuantizedCloud qc = random_qcloud(rng, 1, {16384, 16384, 4096, 4096});
    const auto bytes = encode_bytes(qc);
    const std::uint64_t codebooks = (16384ull * 3 + 16384ull * 4 + 4096ull * 3 + 4096ull * 45) * 4;
    EXPECT_EQ(codebooks, 1245184ull);
    // 14+14+12+12 index bits, each stream padded to a byte: 2+2+2+2
    EXPECT_EQ(bytes.size(), kHeaderBytes + codebooks + 16 + 8);

    const SizeReport rep = size_report(qc);
    EXPECT_EQ(rep.total_bytes, bytes.size());
    EXPECT_EQ(rep.stream_bytes[0], 2u);
    EXPECT_EQ(rep.stream_bytes[3], 2u);
    EXPECT_EQ(rep.raw_bytes, 16u);
}

TEST(Codec, RoundTripBitExact) {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        const std::array<std::uint32_t, 4> entries{
            std::uint32_t{1} << (rng() % 8), std::uint32_t{1} << (rng() % 8),
            std::uint32_t{1} << (rng() % 6), std::uint32_t{1} << (rng() % 6)};
        const QuantizedCloud qc = random_qcloud(rng, rng() % 100, entries);
        const auto bytes = encode_bytes(qc);
        const QuantizedCloud back = decode_bytes(bytes);
        EXPECT_EQ(back, qc);
        EXPECT_EQ(encode_bytes(back), bytes);
    }
}

TEST(Codec, EmptyCloudRoundTrips) {
    std::mt19937_64 rng(54);
    const QuantizedCloud qc = random_qcloud(rng, 0, {4, 4, 2, 2});
    const auto bytes = encode_bytes(qc);
    EXPECT_EQ(bytes.size(),
              kHeaderBytes + (4 * 3 + 4 * 4 + 2 * 3 + 2 * 45) * sizeof(float));
    const QuantizedCloud back = decode_bytes(bytes);
    EXPECT_EQ(back, qc);
}

TEST(Codec, EveryTruncationRejectedAsTruncated) {
    std::mt19937_64 rng(55);
    const QuantizedCloud qc = random_qcloud(rng, 11, {8, 4, 4, 2});
    const auto bytes = encode_bytes(qc);
    for (std::size_t len = 0; len < bytes.size(); ++len) {
        try {
            decode_bytes(std::span<const std::uint8_t>(bytes.data(), len));
            FAIL() << "prefix of length " << len << " decoded";
        } catch (const FormatError& e) {
            EXPECT_EQ(e.kind(), FormatError::Kind::Truncated) << "prefix length " << len;
        }
    }
}

TEST(Codec, CorruptMagicRejectedBeforePayload) {
    std::mt19937_64 rng(56);
    const QuantizedCloud qc = random_qcloud(rng, 4, {4, 4, 2, 2});
    auto bytes = encode_bytes(qc);
    bytes[0] = 'X';
    try {
        decode_bytes(bytes);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.kind(), FormatError::Kind::BadMagic);
        EXPECT_EQ(e.byte_offset(), 0u);
    }
}

TEST(Codec, UnsupportedVersionRejected) {
    std::mt19937_64 rng(57);
    auto bytes = encode_bytes(random_qcloud(rng, 2, {4, 4, 2, 2}));
    bytes[4] = 9; // version low byte
    try {
        decode_bytes(bytes);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.kind(), FormatError::Kind::BadVersion);
    }
}

TEST(Codec, EntriesBitsMismatchRejected) {
    std::mt19937_64 rng(58);
    auto bytes = encode_bytes(random_qcloud(rng, 2, {4, 4, 2, 2}));
    // group 0 record starts at 16; entries u32 at +3
    bytes[16 + 3] = 5;
    try {
        decode_bytes(bytes);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.kind(), FormatError::Kind::BadHeader);
    }
}

TEST(Codec, TrailingDataRejected) {
    std::mt19937_64 rng(59);
    auto bytes = encode_bytes(random_qcloud(rng, 2, {4, 4, 2, 2}));
    bytes.push_back(0);
    try {
        decode_bytes(bytes);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.kind(), FormatError::Kind::BadValue);
    }
}

TEST(Codec, NonFiniteCodebookValueRejected) {
    std::mt19937_64 rng(60);
    const QuantizedCloud qc = random_qcloud(rng, 2, {4, 4, 2, 2});
    auto bytes = encode_bytes(qc);
    const float nan = std::nanf("");
    std::memcpy(bytes.data() + kHeaderBytes, &nan, sizeof(float));
    try {
        decode_bytes(bytes);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.kind(), FormatError::Kind::BadValue);
    }
}

TEST(Codec, EncodeValidatesIndexRange) {
    std::mt19937_64 rng(61);
    QuantizedCloud qc = random_qcloud(rng, 4, {4, 4, 2, 2});
    qc.idx_s[1] = 4;
    EXPECT_THROW(encode_bytes(qc), std::invalid_argument);
}

TEST(SizeReport, MatchesActualFileSize) {
    std::mt19937_64 rng(62);
    for (int trial = 0; trial < 20; ++trial) {
        const std::array<std::uint32_t, 4> entries{
            std::uint32_t{1} << (rng() % 10), std::uint32_t{1} << (rng() % 10),
            std::uint32_t{1} << (rng() % 7), std::uint32_t{1} << (rng() % 7)};
        const std::size_t n = rng() % 500;
        const QuantizedCloud qc = random_qcloud(rng, n, entries);
        const SizeReport rep = size_report(qc);
        EXPECT_EQ(rep.total_bytes, encode_bytes(qc).size());
        for (int g = 0; g < 4; ++g) {
            const std::uint64_t bits = bits_for_entries(entries[g]);
            EXPECT_EQ(rep.stream_bytes[g], (n * bits + 7) / 8);
        }
        EXPECT_EQ(rep.uncompressed_bytes, n * 59ull * 4);
    }
}

TEST(Codec, FileRoundTrip) {
    std::mt19937_64 rng(63);
    const QuantizedCloud qc = random_qcloud(rng, 37, {16, 8, 4, 4});
    const std::string path = ::testing::TempDir() + "/gsvq_codec_test.nvqg";
    const std::uint64_t written = encode(qc, path);
    EXPECT_EQ(written, size_report(qc).total_bytes);
    const QuantizedCloud back = decode(path);
    EXPECT_EQ(back, qc);
}

TEST(Codec, MissingFileThrowsIoError) {
    EXPECT_THROW(decode("/nonexistent/dir/file.nvqg"), IoError);
}
