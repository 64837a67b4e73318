#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

#include "peerchain/crypto/types.hpp"

namespace peerchain::crypto {

/// Incremental SM3 (GB/T 32905-2016).
class Sm3 {
public:
    Sm3();

    Sm3& update(ByteView data);
    Sm3& update(std::string_view s) { return update(as_bytes(s)); }
    Digest finish();

private:
    void compress(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_{};
    std::size_t buffered_ = 0;
    std::uint64_t total_bytes_ = 0;
};

Digest sm3_digest(ByteView data);
inline Digest sm3_digest(std::string_view s) { return sm3_digest(as_bytes(s)); }
/// Digest of the concatenation of `parts`.
Digest sm3_digest(std::initializer_list<ByteView> parts);

}  // namespace peerchain::crypto
