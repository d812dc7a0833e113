#pragma once

// Little-endian packing shared by the .mfi and .mirw codecs.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "wirefit/errors.hpp"

namespace wirefit::detail {

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
}

inline void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) { put_le(out, v); }
inline void put_f32(std::vector<std::uint8_t>& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::vector<std::uint8_t>& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

// Sequential reader over a byte buffer. Running past the end throws
// FormatError(Truncated).
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }

    std::span<const std::uint8_t> take(std::size_t n, const char* what) {
        if (remaining() < n) {
            throw FormatError(FormatErrorKind::Truncated, std::string("unexpected end of data reading ") + what);
        }
        auto view = bytes_.subspan(pos_, n);
        pos_ += n;
        return view;
    }

    template <typename U>
    U le(const char* what) {
        auto raw = take(sizeof(U), what);
        U value = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            value |= static_cast<U>(static_cast<U>(raw[i]) << (8 * i));
        }
        return value;
    }

    std::uint8_t u8(const char* what) { return take(1, what)[0]; }
    std::uint32_t u32(const char* what) { return le<std::uint32_t>(what); }
    float f32(const char* what) { return std::bit_cast<float>(le<std::uint32_t>(what)); }
    double f64(const char* what) { return std::bit_cast<double>(le<std::uint64_t>(what)); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> slurp(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string());
    return slurp(in);
}

inline void dump(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatErrorKind::Io, "write failed for " + path.string());
}

}  // namespace wirefit::detail
