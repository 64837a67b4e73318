#pragma once

#include <cstdint>
#include <mutex>
#include <span>

#include "peerchain/crypto/types.hpp"

namespace peerchain::crypto {

/// Source of key material and nonces. Implementations are thread-safe.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    std::uint64_t next_u64();
    template <typename Fixed>
    Fixed draw() {
        Fixed v;
        fill(v.bytes);
        return v;
    }
};

/// Operating-system randomness (OpenSSL's DRBG seeded from the OS).
class OsRandom final : public RandomSource {
public:
    void fill(std::span<std::uint8_t> out) override;
};

RandomSource& os_random();

/// Deterministic stream: block i = SM3("peerchain/drbg" || seed || be64(i)).
/// Only for reproducible tests and workload replay.
class SeededRandom final : public RandomSource {
public:
    explicit SeededRandom(ByteView seed);
    explicit SeededRandom(std::uint64_t seed);

    void fill(std::span<std::uint8_t> out) override;

private:
    void refill();

    std::mutex mutex_;
    Bytes seed_;
    std::uint64_t counter_ = 0;
    Digest block_{};
    std::size_t used_ = sizeof(Digest::bytes);
};

}  // namespace peerchain::crypto
