#pragma once

// Little-endian byte encoding shared by the binary file formats.

#include "mwgan/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace mwgan::detail {

class ByteWriter {
public:
    void magic(const char (&tag)[5]) { bytes_.insert(bytes_.end(), tag, tag + 4); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }

    void f64s(std::span<const double> vs) {
        for (double v : vs) f64(v);
    }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, const char* format) : bytes_(bytes), format_(format) {}

    void expect_magic(const char (&tag)[5]) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, tag, 4) != 0) throw FormatError(std::string(format_) + ": bad magic");
        pos_ += 4;
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(bits);
    }

    // Fails before reading anything if fewer than `count` bytes remain.
    void need(std::size_t count) const {
        if (bytes_.size() - pos_ < count) throw FormatError(std::string(format_) + ": truncated payload");
    }

    void expect_end() const {
        if (pos_ != bytes_.size()) throw FormatError(std::string(format_) + ": trailing bytes after payload");
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    const char* format_;
};

} // namespace mwgan::detail
