#include "peerchain/crypto/sm4.hpp"

#include <bit>

namespace peerchain::crypto {

namespace {

constexpr std::uint8_t kSbox[256] = {
    0xD6, 0x90, 0xE9, 0xFE, 0xCC, 0xE1, 0x3D, 0xB7, 0x16, 0xB6, 0x14, 0xC2, 0x28, 0xFB, 0x2C, 0x05,
    0x2B, 0x67, 0x9A, 0x76, 0x2A, 0xBE, 0x04, 0xC3, 0xAA, 0x44, 0x13, 0x26, 0x49, 0x86, 0x06, 0x99,
    0x9C, 0x42, 0x50, 0xF4, 0x91, 0xEF, 0x98, 0x7A, 0x33, 0x54, 0x0B, 0x43, 0xED, 0xCF, 0xAC, 0x62,
    0xE4, 0xB3, 0x1C, 0xA9, 0xC9, 0x08, 0xE8, 0x95, 0x80, 0xDF, 0x94, 0xFA, 0x75, 0x8F, 0x3F, 0xA6,
    0x47, 0x07, 0xA7, 0xFC, 0xF3, 0x73, 0x17, 0xBA, 0x83, 0x59, 0x3C, 0x19, 0xE6, 0x85, 0x4F, 0xA8,
    0x68, 0x6B, 0x81, 0xB2, 0x71, 0x64, 0xDA, 0x8B, 0xF8, 0xEB, 0x0F, 0x4B, 0x70, 0x56, 0x9D, 0x35,
    0x1E, 0x24, 0x0E, 0x5E, 0x63, 0x58, 0xD1, 0xA2, 0x25, 0x22, 0x7C, 0x3B, 0x01, 0x21, 0x78, 0x87,
    0xD4, 0x00, 0x46, 0x57, 0x9F, 0xD3, 0x27, 0x52, 0x4C, 0x36, 0x02, 0xE7, 0xA0, 0xC4, 0xC8, 0x9E,
    0xEA, 0xBF, 0x8A, 0xD2, 0x40, 0xC7, 0x38, 0xB5, 0xA3, 0xF7, 0xF2, 0xCE, 0xF9, 0x61, 0x15, 0xA1,
    0xE0, 0xAE, 0x5D, 0xA4, 0x9B, 0x34, 0x1A, 0x55, 0xAD, 0x93, 0x32, 0x30, 0xF5, 0x8C, 0xB1, 0xE3,
    0x1D, 0xF6, 0xE2, 0x2E, 0x82, 0x66, 0xCA, 0x60, 0xC0, 0x29, 0x23, 0xAB, 0x0D, 0x53, 0x4E, 0x6F,
    0xD5, 0xDB, 0x37, 0x45, 0xDE, 0xFD, 0x8E, 0x2F, 0x03, 0xFF, 0x6A, 0x72, 0x6D, 0x6C, 0x5B, 0x51,
    0x8D, 0x1B, 0xAF, 0x92, 0xBB, 0xDD, 0xBC, 0x7F, 0x11, 0xD9, 0x5C, 0x41, 0x1F, 0x10, 0x5A, 0xD8,
    0x0A, 0xC1, 0x31, 0x88, 0xA5, 0xCD, 0x7B, 0xBD, 0x2D, 0x74, 0xD0, 0x12, 0xB8, 0xE5, 0xB4, 0xB0,
    0x89, 0x69, 0x97, 0x4A, 0x0C, 0x96, 0x77, 0x7E, 0x65, 0xB9, 0xF1, 0x09, 0xC5, 0x6E, 0xC6, 0x84,
    0x18, 0xF0, 0x7D, 0xEC, 0x3A, 0xDC, 0x4D, 0x20, 0x79, 0xEE, 0x5F, 0x3E, 0xD7, 0xCB, 0x39, 0x48};

constexpr std::uint32_t kFk[4] = {0xa3b1bac6, 0x56aa3350, 0x677d9197, 0xb27022dc};

// CK[i] byte j = (4i + j) * 7 mod 256.
constexpr std::array<std::uint32_t, 32> make_ck() {
    std::array<std::uint32_t, 32> ck{};
    for (std::uint32_t i = 0; i < 32; ++i) {
        std::uint32_t v = 0;
        for (std::uint32_t j = 0; j < 4; ++j) v = (v << 8) | (((4 * i + j) * 7) & 0xff);
        ck[i] = v;
    }
    return ck;
}
constexpr auto kCk = make_ck();

inline std::uint32_t tau(std::uint32_t a) {
    return (std::uint32_t{kSbox[a >> 24]} << 24) | (std::uint32_t{kSbox[(a >> 16) & 0xff]} << 16) |
           (std::uint32_t{kSbox[(a >> 8) & 0xff]} << 8) | kSbox[a & 0xff];
}

inline std::uint32_t round_t(std::uint32_t x) {
    const std::uint32_t b = tau(x);
    return b ^ std::rotl(b, 2) ^ std::rotl(b, 10) ^ std::rotl(b, 18) ^ std::rotl(b, 24);
}

inline std::uint32_t key_t(std::uint32_t x) {
    const std::uint32_t b = tau(x);
    return b ^ std::rotl(b, 13) ^ std::rotl(b, 23);
}

inline std::uint32_t load(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

inline void store(std::uint32_t v, std::uint8_t* p) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
}

Sm4::Block crypt(const Sm4::Block& in, const std::array<std::uint32_t, 32>& rk, bool reverse) {
    std::uint32_t x[4] = {load(in.data()), load(in.data() + 4), load(in.data() + 8), load(in.data() + 12)};
    for (int i = 0; i < 32; ++i) {
        const std::uint32_t k = rk[reverse ? 31 - i : i];
        const std::uint32_t next = x[0] ^ round_t(x[1] ^ x[2] ^ x[3] ^ k);
        x[0] = x[1];
        x[1] = x[2];
        x[2] = x[3];
        x[3] = next;
    }
    Sm4::Block out;
    store(x[3], out.data());
    store(x[2], out.data() + 4);
    store(x[1], out.data() + 8);
    store(x[0], out.data() + 12);
    return out;
}

}  // namespace

Sm4::Sm4(const SymmetricKey& key) {
    std::uint32_t k[4];
    for (int i = 0; i < 4; ++i) k[i] = load(key.bytes.data() + 4 * i) ^ kFk[i];
    for (int i = 0; i < 32; ++i) {
        const std::uint32_t next = k[0] ^ key_t(k[1] ^ k[2] ^ k[3] ^ kCk[i]);
        round_keys_[i] = next;
        k[0] = k[1];
        k[1] = k[2];
        k[2] = k[3];
        k[3] = next;
    }
}

Sm4::Block Sm4::encrypt_block(const Block& in) const { return crypt(in, round_keys_, false); }

Sm4::Block Sm4::decrypt_block(const Block& in) const { return crypt(in, round_keys_, true); }

}  // namespace peerchain::crypto
