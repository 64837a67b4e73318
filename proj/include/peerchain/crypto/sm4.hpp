#pragma once

#include <array>
#include <cstdint>

#include "peerchain/crypto/types.hpp"

namespace peerchain::crypto {

/// SM4 block cipher (GB/T 32907-2016), 128-bit key and block.
class Sm4 {
public:
    static constexpr std::size_t block_size = 16;
    using Block = std::array<std::uint8_t, block_size>;

    explicit Sm4(const SymmetricKey& key);

    Block encrypt_block(const Block& in) const;
    Block decrypt_block(const Block& in) const;

private:
    std::array<std::uint32_t, 32> round_keys_{};
};

}  // namespace peerchain::crypto
