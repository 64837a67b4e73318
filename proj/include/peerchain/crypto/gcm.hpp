#pragma once

#include <array>
#include <cstdint>

#include "peerchain/crypto/sm4.hpp"

namespace peerchain::crypto {

/// GHASH over GF(2^128) with Shoup's 4-bit tables.
class Ghash {
public:
    using Block = std::array<std::uint8_t, 16>;

    explicit Ghash(const Block& h);

    /// x <- x * H
    void multiply(Block& x) const;

private:
    std::array<std::uint64_t, 16> hl_{};
    std::array<std::uint64_t, 16> hh_{};
};

/// SM4 in Galois/Counter Mode with a 96-bit nonce and a 128-bit tag appended
/// to the ciphertext.
class Sm4Gcm {
public:
    static constexpr std::size_t tag_size = 16;

    explicit Sm4Gcm(const SymmetricKey& key);

    Bytes seal(const Nonce& nonce, ByteView aad, ByteView plaintext) const;
    /// Tag is checked before any plaintext is produced. Throws
    /// Error(decrypt_failure) on authentication failure.
    Bytes open(const Nonce& nonce, ByteView aad, ByteView sealed) const;

private:
    Ghash::Block tag(const Ghash::Block& j0, ByteView aad, ByteView ciphertext) const;
    void ctr(const Ghash::Block& j0, ByteView in, std::uint8_t* out) const;

    Sm4 cipher_;
    Ghash ghash_;
};

}  // namespace peerchain::crypto
