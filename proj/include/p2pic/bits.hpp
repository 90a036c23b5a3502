#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "error.hpp"

namespace p2pic {

// Finite bit string stored as '0'/'1' characters.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::string_view bits) : bits_(bits) {
        for (char c : bits_)
            if (c != '0' && c != '1')
                throw Error(ErrorKind::InvalidArgument, "bit string contains non-bit character");
    }

    // Most significant bit first.
    static BitString from_uint(std::uint64_t v, int width) {
        BitString b;
        b.bits_.resize(static_cast<std::size_t>(width), '0');
        for (int i = 0; i < width; ++i)
            if ((v >> (width - 1 - i)) & 1u) b.bits_[static_cast<std::size_t>(i)] = '1';
        return b;
    }

    static BitString from_bit(int bit) { return BitString(bit ? "1" : "0"); }

    std::size_t size() const noexcept { return bits_.size(); }
    bool empty() const noexcept { return bits_.empty(); }
    int bit(std::size_t i) const { return bits_.at(i) == '1' ? 1 : 0; }
    const std::string& str() const noexcept { return bits_; }

    void push_back(int bit) { bits_.push_back(bit ? '1' : '0'); }
    BitString& operator+=(const BitString& o) {
        bits_ += o.bits_;
        return *this;
    }
    friend BitString operator+(BitString a, const BitString& b) { return a += b; }

    BitString substr(std::size_t pos, std::size_t len = std::string::npos) const {
        BitString b;
        b.bits_ = bits_.substr(pos, len);
        return b;
    }

    bool is_prefix_of(const BitString& o) const {
        return bits_.size() <= o.bits_.size() && o.bits_.compare(0, bits_.size(), bits_) == 0;
    }

    std::uint64_t to_uint() const {
        if (bits_.size() > 64) throw Error(ErrorKind::InvalidArgument, "bit string too long for integer");
        std::uint64_t v = 0;
        for (char c : bits_) v = (v << 1) | (c == '1' ? 1u : 0u);
        return v;
    }

    // "<nbits>:<hex>", bits packed MSB first and zero padded on the right to a nibble.
    std::string to_hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out = std::to_string(bits_.size()) + ":";
        for (std::size_t i = 0; i < bits_.size(); i += 4) {
            int v = 0;
            for (std::size_t j = 0; j < 4; ++j) {
                v <<= 1;
                if (i + j < bits_.size() && bits_[i + j] == '1') v |= 1;
            }
            out.push_back(digits[v]);
        }
        return out;
    }

    static BitString from_hex(std::string_view s) {
        auto colon = s.find(':');
        if (colon == std::string_view::npos) throw Error(ErrorKind::InvalidArgument, "hex bit string lacks length");
        std::size_t n = std::stoul(std::string(s.substr(0, colon)));
        std::string_view hex = s.substr(colon + 1);
        if (hex.size() != (n + 3) / 4) throw Error(ErrorKind::InvalidArgument, "hex bit string length mismatch");
        BitString b;
        for (char c : hex) {
            int v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
            else throw Error(ErrorKind::InvalidArgument, "bad hex digit");
            for (int j = 3; j >= 0; --j) b.push_back((v >> j) & 1);
        }
        b.bits_.resize(n);
        return b;
    }

    auto operator<=>(const BitString&) const = default;
    bool operator==(const BitString&) const = default;

private:
    std::string bits_;
};

} // namespace p2pic

template <>
struct std::hash<p2pic::BitString> {
    std::size_t operator()(const p2pic::BitString& b) const noexcept { return std::hash<std::string>{}(b.str()); }
};
