#include "peerchain/crypto/random.hpp"

#include <openssl/rand.h>

#include <cstring>

#include "peerchain/crypto/sm3.hpp"
#include "peerchain/error.hpp"

namespace peerchain::crypto {

std::uint64_t RandomSource::next_u64() {
    std::uint8_t b[8];
    fill(b);
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
}

void OsRandom::fill(std::span<std::uint8_t> out) {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
        throw Error(ErrorCode::io_error, "system random generator failed");
    }
}

RandomSource& os_random() {
    static OsRandom instance;
    return instance;
}

SeededRandom::SeededRandom(ByteView seed) : seed_(seed.begin(), seed.end()) {}

SeededRandom::SeededRandom(std::uint64_t seed) {
    Writer w;
    w.u64(seed);
    seed_ = std::move(w).take();
}

void SeededRandom::refill() {
    Writer ctr;
    ctr.u64(counter_++);
    block_ = sm3_digest({as_bytes("peerchain/drbg"), seed_, ctr.data()});
    used_ = 0;
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
    std::lock_guard lock(mutex_);
    std::size_t pos = 0;
    while (pos < out.size()) {
        if (used_ == block_.bytes.size()) refill();
        const std::size_t n = std::min(out.size() - pos, block_.bytes.size() - used_);
        std::memcpy(out.data() + pos, block_.bytes.data() + used_, n);
        used_ += n;
        pos += n;
    }
}

}  // namespace peerchain::crypto
