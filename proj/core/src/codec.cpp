#include "gsvq/codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "gsvq/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              ".nvqg codec assumes a little-endian host");

namespace gsvq {

namespace {

class ByteWriter {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    template <typename T>
    void pod(T v) {
        bytes(&v, sizeof(T));
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

// LSB-first bit packing: the first value occupies the least significant bits
// of the first byte.
class BitWriter {
public:
    explicit BitWriter(ByteWriter& out) : out_(out) {}
    void put(std::uint32_t value, int bits) {
        acc_ |= static_cast<std::uint64_t>(value) << filled_;
        filled_ += bits;
        while (filled_ >= 8) {
            out_.pod<std::uint8_t>(static_cast<std::uint8_t>(acc_ & 0xff));
            acc_ >>= 8;
            filled_ -= 8;
        }
    }
    void flush() {
        if (filled_ > 0) {
            out_.pod<std::uint8_t>(static_cast<std::uint8_t>(acc_ & 0xff));
            acc_ = 0;
            filled_ = 0;
        }
    }

private:
    ByteWriter& out_;
    std::uint64_t acc_ = 0;
    int filled_ = 0;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n) {
            throw FormatError(FormatError::Kind::Truncated, pos_,
                              std::string("truncated file while reading ") + what +
                                  " at byte " + std::to_string(pos_));
        }
    }
    void bytes(void* p, std::size_t n, const char* what) {
        need(n, what);
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }
    template <typename T>
    T pod(const char* what) {
        T v;
        bytes(&v, sizeof(T), what);
        return v;
    }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

class BitReader {
public:
    BitReader(ByteReader& in, const char* what) : in_(in), what_(what) {}
    std::uint32_t get(int bits) {
        while (filled_ < bits) {
            acc_ |= static_cast<std::uint64_t>(in_.pod<std::uint8_t>(what_)) << filled_;
            filled_ += 8;
        }
        const auto v = static_cast<std::uint32_t>(acc_ & ((std::uint64_t{1} << bits) - 1));
        acc_ >>= bits;
        filled_ -= bits;
        return v;
    }

private:
    ByteReader& in_;
    const char* what_;
    std::uint64_t acc_ = 0;
    int filled_ = 0;
};

void validate_for_encode(const QuantizedCloud& qc) {
    const std::size_t n = qc.size();
    if (qc.opacity_raw.size() != n) {
        throw std::invalid_argument("encode: opacity stream length mismatch");
    }
    for (int g = 0; g < 4; ++g) {
        const auto group = static_cast<AttrGroup>(g);
        const Codebook& cb = qc.codebook(group);
        if (cb.dim != kGroupDims[g]) {
            throw std::invalid_argument(std::string("encode: ") + kGroupNames[g] +
                                        " codebook dim must be " + std::to_string(kGroupDims[g]));
        }
        if (cb.entries < 1 || !std::has_single_bit(cb.entries)) {
            throw std::invalid_argument(std::string("encode: ") + kGroupNames[g] +
                                        " codebook entries must be a power of two >= 1");
        }
        if (cb.vectors.size() != std::size_t(cb.entries) * cb.dim) {
            throw std::invalid_argument("encode: codebook storage size mismatch");
        }
        const auto& idx = qc.indices(group);
        if (idx.size() != n) {
            throw std::invalid_argument(std::string("encode: ") + kGroupNames[g] +
                                        " index stream length mismatch");
        }
        for (const std::uint32_t k : idx) {
            if (k >= cb.entries) {
                throw std::invalid_argument(std::string("encode: ") + kGroupNames[g] +
                                            " index out of range");
            }
        }
    }
}

} // namespace

std::uint8_t bits_for_entries(std::uint32_t entries) {
    return static_cast<std::uint8_t>(std::bit_width(entries) - 1);
}

std::vector<std::uint8_t> encode_bytes(const QuantizedCloud& qc) {
    validate_for_encode(qc);
    const std::uint64_t n = qc.size();

    ByteWriter w;
    w.bytes(kMagic.data(), 4);
    w.pod<std::uint16_t>(kFormatVersion);
    w.pod<std::uint16_t>(kFlagHasSh);
    w.pod<std::uint64_t>(n);
    for (int g = 0; g < 4; ++g) {
        const Codebook& cb = qc.codebook(static_cast<AttrGroup>(g));
        w.pod<std::uint16_t>(static_cast<std::uint16_t>(cb.dim));
        w.pod<std::uint8_t>(bits_for_entries(cb.entries));
        w.pod<std::uint32_t>(cb.entries);
    }
    for (int g = 0; g < 4; ++g) {
        const Codebook& cb = qc.codebook(static_cast<AttrGroup>(g));
        w.bytes(cb.vectors.data(), cb.vectors.size() * sizeof(float));
    }
    for (std::uint64_t i = 0; i < n; ++i) {
        w.bytes(qc.positions[i].data(), 3 * sizeof(float));
        w.pod<float>(qc.opacity_raw[i]);
    }
    for (int g = 0; g < 4; ++g) {
        const Codebook& cb = qc.codebook(static_cast<AttrGroup>(g));
        const auto& idx = qc.indices(static_cast<AttrGroup>(g));
        const int bits = bits_for_entries(cb.entries);
        BitWriter bw(w);
        if (bits > 0) {
            for (const std::uint32_t k : idx) bw.put(k, bits);
        }
        bw.flush();
    }
    return w.take();
}

std::uint64_t encode(const QuantizedCloud& qc, const std::string& path) {
    const auto bytes = encode_bytes(qc);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
    return bytes.size();
}

QuantizedCloud decode_bytes(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);

    std::array<char, 4> magic{};
    r.bytes(magic.data(), 4, "magic");
    if (magic != kMagic) {
        throw FormatError(FormatError::Kind::BadMagic, 0, "bad magic, not a .nvqg file");
    }
    const auto version = r.pod<std::uint16_t>("version");
    if (version != kFormatVersion) {
        throw FormatError(FormatError::Kind::BadVersion, 4,
                          "unsupported version " + std::to_string(version));
    }
    const auto flags = r.pod<std::uint16_t>("flags");
    if (flags != kFlagHasSh) {
        throw FormatError(FormatError::Kind::BadHeader, 6,
                          "unsupported flags " + std::to_string(flags));
    }
    const auto n = r.pod<std::uint64_t>("splat count");

    struct GroupHeader {
        std::uint16_t dim;
        std::uint8_t bits;
        std::uint32_t entries;
    };
    GroupHeader groups[4];
    for (int g = 0; g < 4; ++g) {
        const std::size_t at = r.offset();
        groups[g].dim = r.pod<std::uint16_t>("group dim");
        groups[g].bits = r.pod<std::uint8_t>("group bits");
        groups[g].entries = r.pod<std::uint32_t>("group entries");
        if (groups[g].dim != kGroupDims[g]) {
            throw FormatError(FormatError::Kind::BadHeader, at,
                              std::string(kGroupNames[g]) + " group dim " +
                                  std::to_string(groups[g].dim) + ", expected " +
                                  std::to_string(kGroupDims[g]));
        }
        if (groups[g].entries < 1 || groups[g].bits > 31 ||
            groups[g].entries != (std::uint32_t{1} << groups[g].bits)) {
            throw FormatError(FormatError::Kind::BadHeader, at,
                              std::string(kGroupNames[g]) + " group: entries (" +
                                  std::to_string(groups[g].entries) + ") != 2^bits (bits=" +
                                  std::to_string(groups[g].bits) + ")");
        }
    }

    QuantizedCloud qc;
    for (int g = 0; g < 4; ++g) {
        Codebook& cb = qc.codebook(static_cast<AttrGroup>(g));
        cb.entries = groups[g].entries;
        cb.dim = groups[g].dim;
        cb.usage.assign(cb.entries, 0);
        cb.vectors.resize(std::size_t(cb.entries) * cb.dim);
        const std::size_t at = r.offset();
        r.bytes(cb.vectors.data(), cb.vectors.size() * sizeof(float), "codebook");
        for (std::size_t i = 0; i < cb.vectors.size(); ++i) {
            if (!std::isfinite(cb.vectors[i])) {
                throw FormatError(FormatError::Kind::BadValue, at + i * sizeof(float),
                                  std::string("non-finite value in ") + kGroupNames[g] +
                                      " codebook");
            }
        }
    }

    qc.positions.resize(n);
    qc.opacity_raw.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        r.bytes(qc.positions[i].data(), 3 * sizeof(float), "splat position");
        qc.opacity_raw[i] = r.pod<float>("splat opacity");
    }

    for (int g = 0; g < 4; ++g) {
        auto& idx = qc.indices(static_cast<AttrGroup>(g));
        idx.resize(n);
        const int bits = groups[g].bits;
        if (bits == 0) {
            std::fill(idx.begin(), idx.end(), 0u);
            continue;
        }
        const std::size_t at = r.offset();
        const std::size_t stream_bytes = (n * static_cast<std::size_t>(bits) + 7) / 8;
        r.need(stream_bytes, "index stream");
        BitReader br(r, "index stream");
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::uint32_t k = br.get(bits);
            if (k >= groups[g].entries) {
                throw FormatError(FormatError::Kind::IndexRange, at,
                                  std::string(kGroupNames[g]) + " index " + std::to_string(k) +
                                      " out of range at splat " + std::to_string(i));
            }
            idx[i] = k;
        }
        // Skip padding up to the declared stream length.
        for (std::size_t i = r.offset() - at; i < stream_bytes; ++i) {
            (void)r.pod<std::uint8_t>("padding");
        }
    }

    if (r.remaining() != 0) {
        throw FormatError(FormatError::Kind::BadValue, r.offset(),
                          "trailing data after the last index stream");
    }
    return qc;
}

QuantizedCloud decode(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed for '" + path + "'");
    return decode_bytes(bytes);
}

SizeReport size_report(const QuantizedCloud& qc) {
    const std::uint64_t n = qc.size();
    SizeReport rep;
    rep.header_bytes = kHeaderBytes;
    for (int g = 0; g < 4; ++g) {
        const Codebook& cb = qc.codebook(static_cast<AttrGroup>(g));
        rep.codebook_bytes += std::uint64_t(cb.entries) * cb.dim * sizeof(float);
        const int bits = bits_for_entries(cb.entries);
        rep.stream_bytes[g] = (n * static_cast<std::uint64_t>(bits) + 7) / 8;
    }
    rep.raw_bytes = n * 16; // 3 x f32 position + f32 opacity
    rep.total_bytes = rep.header_bytes + rep.codebook_bytes + rep.raw_bytes;
    for (int g = 0; g < 4; ++g) rep.total_bytes += rep.stream_bytes[g];
    rep.uncompressed_bytes = n * static_cast<std::uint64_t>(kSplatParamCount) * sizeof(float);
    rep.ratio = rep.total_bytes == 0
                    ? 0.0
                    : static_cast<double>(rep.uncompressed_bytes) / rep.total_bytes;
    return rep;
}

} // namespace gsvq
