#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace peerchain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string to_string(ByteView b) {
    return {reinterpret_cast<const char*>(b.data()), b.size()};
}

std::string to_hex(ByteView data);
// Throws Error(invalid_argument) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

/// Fixed-size byte string with value semantics. Distinct tags give distinct
/// types (Digest, Address, ...) that cannot be mixed up at call sites.
template <std::size_t N, typename Tag>
struct FixedBytes {
    static constexpr std::size_t size_bytes = N;
    std::array<std::uint8_t, N> bytes{};

    static FixedBytes from(ByteView src);
    static FixedBytes from_hex(std::string_view hex) { return from(peerchain::from_hex(hex)); }

    ByteView view() const { return bytes; }
    std::string hex() const { return to_hex(bytes); }
    bool is_zero() const {
        return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
    }

    auto operator<=>(const FixedBytes&) const = default;
};

[[noreturn]] void throw_size_mismatch(std::size_t expected, std::size_t got);

template <std::size_t N, typename Tag>
FixedBytes<N, Tag> FixedBytes<N, Tag>::from(ByteView src) {
    if (src.size() != N) throw_size_mismatch(N, src.size());
    FixedBytes out;
    std::copy(src.begin(), src.end(), out.bytes.begin());
    return out;
}

/// Canonical big-endian writer. Variable-length fields carry a u32 length
/// prefix; fixed-size fields are written raw.
class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void raw(ByteView v) { out_.insert(out_.end(), v.begin(), v.end()); }
    void bytes(ByteView v);
    void str(std::string_view s) { bytes(as_bytes(s)); }
    template <std::size_t N, typename Tag>
    void fixed(const FixedBytes<N, Tag>& v) { raw(v.bytes); }

    const Bytes& data() const& { return out_; }
    Bytes take() && { return std::move(out_); }

private:
    Bytes out_;
};

/// Bounds-checked reader over a canonical encoding; any overrun throws
/// Error(corrupt_data).
class Reader {
public:
    explicit Reader(ByteView in) : in_(in) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    ByteView raw(std::size_t n);
    Bytes bytes();
    std::string str();
    template <typename Fixed>
    Fixed fixed() { return Fixed::from(raw(Fixed::size_bytes)); }

    std::size_t remaining() const { return in_.size() - pos_; }
    bool done() const { return pos_ == in_.size(); }
    void expect_done() const;

private:
    ByteView in_;
    std::size_t pos_ = 0;
};

}  // namespace peerchain
