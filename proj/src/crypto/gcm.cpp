#include "peerchain/crypto/gcm.hpp"

#include <openssl/crypto.h>

#include <cstring>

#include "peerchain/error.hpp"

namespace peerchain::crypto {

namespace {

constexpr std::uint64_t kLast4[16] = {0x0000, 0x1c20, 0x3840, 0x2460, 0x7080, 0x6ca0, 0x48c0, 0x54e0,
                                      0xe100, 0xfd20, 0xd940, 0xc560, 0x9180, 0x8da0, 0xa9c0, 0xb5e0};

std::uint64_t load_be64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return v;
}

void store_be64(std::uint64_t v, std::uint8_t* p) {
    for (int i = 7; i >= 0; --i) {
        p[i] = static_cast<std::uint8_t>(v);
        v >>= 8;
    }
}

Ghash::Block zero_block() { return Ghash::Block{}; }

Ghash::Block hash_subkey(const Sm4& cipher) { return cipher.encrypt_block(zero_block()); }

void absorb(const Ghash& g, Ghash::Block& acc, ByteView data) {
    for (std::size_t i = 0; i < data.size(); i += 16) {
        const std::size_t n = std::min<std::size_t>(16, data.size() - i);
        for (std::size_t k = 0; k < n; ++k) acc[k] ^= data[i + k];
        g.multiply(acc);
    }
}

}  // namespace

Ghash::Ghash(const Block& h) {
    std::uint64_t vh = load_be64(h.data());
    std::uint64_t vl = load_be64(h.data() + 8);
    hl_[8] = vl;
    hh_[8] = vh;
    for (int i = 4; i > 0; i >>= 1) {
        const std::uint32_t t = static_cast<std::uint32_t>(vl & 1) * 0xe1000000u;
        vl = (vh << 63) | (vl >> 1);
        vh = (vh >> 1) ^ (static_cast<std::uint64_t>(t) << 32);
        hl_[i] = vl;
        hh_[i] = vh;
    }
    for (int i = 2; i <= 8; i *= 2) {
        for (int j = 1; j < i; ++j) {
            hh_[i + j] = hh_[i] ^ hh_[j];
            hl_[i + j] = hl_[i] ^ hl_[j];
        }
    }
}

void Ghash::multiply(Block& x) const {
    std::uint8_t lo = x[15] & 0x0f;
    std::uint64_t zh = hh_[lo];
    std::uint64_t zl = hl_[lo];
    for (int i = 15; i >= 0; --i) {
        lo = x[i] & 0x0f;
        const std::uint8_t hi = (x[i] >> 4) & 0x0f;
        if (i != 15) {
            const std::uint8_t rem = static_cast<std::uint8_t>(zl & 0x0f);
            zl = (zh << 60) | (zl >> 4);
            zh = (zh >> 4) ^ (kLast4[rem] << 48) ^ hh_[lo];
            zl ^= hl_[lo];
        }
        const std::uint8_t rem = static_cast<std::uint8_t>(zl & 0x0f);
        zl = (zh << 60) | (zl >> 4);
        zh = (zh >> 4) ^ (kLast4[rem] << 48) ^ hh_[hi];
        zl ^= hl_[hi];
    }
    store_be64(zh, x.data());
    store_be64(zl, x.data() + 8);
}

Sm4Gcm::Sm4Gcm(const SymmetricKey& key) : cipher_(key), ghash_(hash_subkey(cipher_)) {}

Ghash::Block Sm4Gcm::tag(const Ghash::Block& j0, ByteView aad, ByteView ciphertext) const {
    Ghash::Block acc{};
    absorb(ghash_, acc, aad);
    absorb(ghash_, acc, ciphertext);
    Ghash::Block lengths{};
    store_be64(static_cast<std::uint64_t>(aad.size()) * 8, lengths.data());
    store_be64(static_cast<std::uint64_t>(ciphertext.size()) * 8, lengths.data() + 8);
    for (int k = 0; k < 16; ++k) acc[k] ^= lengths[k];
    ghash_.multiply(acc);
    const auto mask = cipher_.encrypt_block(j0);
    for (int k = 0; k < 16; ++k) acc[k] ^= mask[k];
    return acc;
}

void Sm4Gcm::ctr(const Ghash::Block& j0, ByteView in, std::uint8_t* out) const {
    Ghash::Block counter = j0;
    std::uint32_t c = (std::uint32_t{counter[12]} << 24) | (std::uint32_t{counter[13]} << 16) |
                      (std::uint32_t{counter[14]} << 8) | counter[15];
    for (std::size_t i = 0; i < in.size(); i += 16) {
        ++c;
        counter[12] = static_cast<std::uint8_t>(c >> 24);
        counter[13] = static_cast<std::uint8_t>(c >> 16);
        counter[14] = static_cast<std::uint8_t>(c >> 8);
        counter[15] = static_cast<std::uint8_t>(c);
        const auto ks = cipher_.encrypt_block(counter);
        const std::size_t n = std::min<std::size_t>(16, in.size() - i);
        for (std::size_t k = 0; k < n; ++k) out[i + k] = in[i + k] ^ ks[k];
    }
}

namespace {
Ghash::Block initial_counter(const Nonce& nonce) {
    Ghash::Block j0{};
    std::memcpy(j0.data(), nonce.bytes.data(), 12);
    j0[15] = 1;
    return j0;
}
}  // namespace

Bytes Sm4Gcm::seal(const Nonce& nonce, ByteView aad, ByteView plaintext) const {
    const auto j0 = initial_counter(nonce);
    Bytes out(plaintext.size() + tag_size);
    ctr(j0, plaintext, out.data());
    const auto t = tag(j0, aad, ByteView(out.data(), plaintext.size()));
    std::memcpy(out.data() + plaintext.size(), t.data(), tag_size);
    return out;
}

Bytes Sm4Gcm::open(const Nonce& nonce, ByteView aad, ByteView sealed) const {
    if (sealed.size() < tag_size) throw Error(ErrorCode::decrypt_failure, "ciphertext shorter than tag");
    const auto j0 = initial_counter(nonce);
    const ByteView body = sealed.first(sealed.size() - tag_size);
    const auto expected = tag(j0, aad, body);
    if (CRYPTO_memcmp(expected.data(), sealed.data() + body.size(), tag_size) != 0) {
        throw Error(ErrorCode::decrypt_failure, "authentication tag mismatch");
    }
    Bytes out(body.size());
    ctr(j0, body, out.data());
    return out;
}

}  // namespace peerchain::crypto
