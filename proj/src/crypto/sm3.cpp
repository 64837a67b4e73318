#include "peerchain/crypto/sm3.hpp"

#include <bit>
#include <cstring>

namespace peerchain::crypto {

namespace {

constexpr std::array<std::uint32_t, 8> kIv = {0x7380166f, 0x4914b2b9, 0x172442d7, 0xda8a0600,
                                              0xa96f30bc, 0x163138aa, 0xe38dee4d, 0xb0fb0e4e};

inline std::uint32_t p0(std::uint32_t x) { return x ^ std::rotl(x, 9) ^ std::rotl(x, 17); }
inline std::uint32_t p1(std::uint32_t x) { return x ^ std::rotl(x, 15) ^ std::rotl(x, 23); }

inline std::uint32_t load_be32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

}  // namespace

Sm3::Sm3() : state_(kIv) {}

void Sm3::compress(const std::uint8_t* block) {
    std::uint32_t w[68];
    std::uint32_t w1[64];
    for (int j = 0; j < 16; ++j) w[j] = load_be32(block + 4 * j);
    for (int j = 16; j < 68; ++j) {
        w[j] = p1(w[j - 16] ^ w[j - 9] ^ std::rotl(w[j - 3], 15)) ^ std::rotl(w[j - 13], 7) ^ w[j - 6];
    }
    for (int j = 0; j < 64; ++j) w1[j] = w[j] ^ w[j + 4];

    std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];

    for (int j = 0; j < 64; ++j) {
        const std::uint32_t t = j < 16 ? 0x79cc4519u : 0x7a879d8au;
        const std::uint32_t a12 = std::rotl(a, 12);
        const std::uint32_t ss1 = std::rotl(a12 + e + std::rotl(t, j % 32), 7);
        const std::uint32_t ss2 = ss1 ^ a12;
        const std::uint32_t ff = j < 16 ? (a ^ b ^ c) : ((a & b) | (a & c) | (b & c));
        const std::uint32_t gg = j < 16 ? (e ^ f ^ g) : ((e & f) | (~e & g));
        const std::uint32_t tt1 = ff + d + ss2 + w1[j];
        const std::uint32_t tt2 = gg + h + ss1 + w[j];
        d = c;
        c = std::rotl(b, 9);
        b = a;
        a = tt1;
        h = g;
        g = std::rotl(f, 19);
        f = e;
        e = p0(tt2);
    }

    state_[0] ^= a; state_[1] ^= b; state_[2] ^= c; state_[3] ^= d;
    state_[4] ^= e; state_[5] ^= f; state_[6] ^= g; state_[7] ^= h;
}

Sm3& Sm3::update(ByteView data) {
    total_bytes_ += data.size();
    std::size_t i = 0;
    if (buffered_ > 0) {
        std::size_t take = std::min(data.size(), buffer_.size() - buffered_);
        std::memcpy(buffer_.data() + buffered_, data.data(), take);
        buffered_ += take;
        i = take;
        if (buffered_ < buffer_.size()) return *this;
        compress(buffer_.data());
        buffered_ = 0;
    }
    for (; i + 64 <= data.size(); i += 64) compress(data.data() + i);
    if (i < data.size()) {
        buffered_ = data.size() - i;
        std::memcpy(buffer_.data(), data.data() + i, buffered_);
    }
    return *this;
}

Digest Sm3::finish() {
    const std::uint64_t bit_len = total_bytes_ * 8;
    std::uint8_t pad[72] = {0x80};
    std::size_t pad_len = (buffered_ < 56) ? (56 - buffered_) : (120 - buffered_);
    for (int k = 0; k < 8; ++k) pad[pad_len + k] = static_cast<std::uint8_t>(bit_len >> (56 - 8 * k));
    const std::uint64_t saved = total_bytes_;
    update(ByteView(pad, pad_len + 8));
    total_bytes_ = saved;

    Digest out;
    for (int k = 0; k < 8; ++k) {
        out.bytes[4 * k] = static_cast<std::uint8_t>(state_[k] >> 24);
        out.bytes[4 * k + 1] = static_cast<std::uint8_t>(state_[k] >> 16);
        out.bytes[4 * k + 2] = static_cast<std::uint8_t>(state_[k] >> 8);
        out.bytes[4 * k + 3] = static_cast<std::uint8_t>(state_[k]);
    }
    state_ = kIv;
    buffered_ = 0;
    total_bytes_ = 0;
    return out;
}

Digest sm3_digest(ByteView data) { return Sm3().update(data).finish(); }

Digest sm3_digest(std::initializer_list<ByteView> parts) {
    Sm3 h;
    for (auto p : parts) h.update(p);
    return h.finish();
}

}  // namespace peerchain::crypto
