#include "peerchain/crypto/sm2.hpp"

#include <openssl/bn.h>
#include <openssl/crypto.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <memory>

#include "peerchain/crypto/sm3.hpp"
#include "peerchain/error.hpp"

namespace peerchain::crypto::sm2 {

namespace {

struct BnFree {
    void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
struct CtxFree {
    void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct PointFree {
    void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct GroupFree {
    void operator()(EC_GROUP* g) const { EC_GROUP_free(g); }
};

using Bn = std::unique_ptr<BIGNUM, BnFree>;
using Ctx = std::unique_ptr<BN_CTX, CtxFree>;
using Point = std::unique_ptr<EC_POINT, PointFree>;

Bn bn() {
    Bn b(BN_new());
    if (!b) throw std::bad_alloc();
    return b;
}

Bn bn_from(ByteView bytes) {
    Bn b(BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr));
    if (!b) throw std::bad_alloc();
    return b;
}

Ctx ctx() {
    Ctx c(BN_CTX_new());
    if (!c) throw std::bad_alloc();
    return c;
}

std::array<std::uint8_t, 32> to32(const BIGNUM* b) {
    std::array<std::uint8_t, 32> out{};
    BN_bn2binpad(b, out.data(), 32);
    return out;
}

void check(int ok) {
    if (ok != 1) throw Error(ErrorCode::invalid_argument, "SM2 arithmetic failed");
}

struct Curve {
    std::unique_ptr<EC_GROUP, GroupFree> group;
    Bn n;
    Bn n_minus_1;
    Bn n_minus_2;
    std::array<std::uint8_t, 32> a{}, b{}, gx{}, gy{};

    Curve() : group(EC_GROUP_new_by_curve_name(NID_sm2)) {
        if (!group) throw Error(ErrorCode::io_error, "OpenSSL lacks the SM2 curve");
        auto c = ctx();
        Bn p = bn(), ba = bn(), bb = bn(), x = bn(), y = bn();
        check(EC_GROUP_get_curve(group.get(), p.get(), ba.get(), bb.get(), c.get()));
        check(EC_POINT_get_affine_coordinates(group.get(), EC_GROUP_get0_generator(group.get()), x.get(),
                                              y.get(), c.get()));
        a = to32(ba.get());
        b = to32(bb.get());
        gx = to32(x.get());
        gy = to32(y.get());
        n.reset(BN_dup(EC_GROUP_get0_order(group.get())));
        n_minus_1.reset(BN_dup(n.get()));
        check(BN_sub_word(n_minus_1.get(), 1));
        n_minus_2.reset(BN_dup(n.get()));
        check(BN_sub_word(n_minus_2.get(), 2));
    }
};

const Curve& curve() {
    static const Curve instance;
    return instance;
}

Point new_point() {
    Point p(EC_POINT_new(curve().group.get()));
    if (!p) throw std::bad_alloc();
    return p;
}

// Returns null on any encoding problem.
Point decode_point(ByteView enc, BN_CTX* c) {
    if (enc.size() != 65 || enc[0] != 0x04) return nullptr;
    auto p = new_point();
    if (EC_POINT_oct2point(curve().group.get(), p.get(), enc.data(), enc.size(), c) != 1) return nullptr;
    if (EC_POINT_is_at_infinity(curve().group.get(), p.get())) return nullptr;
    if (EC_POINT_is_on_curve(curve().group.get(), p.get(), c) != 1) return nullptr;
    return p;
}

PublicKey encode_point(const EC_POINT* p, BN_CTX* c) {
    PublicKey out;
    const std::size_t n =
        EC_POINT_point2oct(curve().group.get(), p, POINT_CONVERSION_UNCOMPRESSED, out.bytes.data(), 65, c);
    if (n != 65) throw Error(ErrorCode::invalid_argument, "cannot encode SM2 point");
    return out;
}

void affine(const EC_POINT* p, std::array<std::uint8_t, 32>& x, std::array<std::uint8_t, 32>& y, BN_CTX* c) {
    Bn bx = bn(), by = bn();
    check(EC_POINT_get_affine_coordinates(curve().group.get(), p, bx.get(), by.get(), c));
    x = to32(bx.get());
    y = to32(by.get());
}

bool in_range(const BIGNUM* v, const BIGNUM* hi) {
    return !BN_is_zero(v) && !BN_is_negative(v) && BN_cmp(v, hi) <= 0;
}

Bytes kdf(ByteView z, std::size_t len) {
    Bytes out;
    out.reserve(len + 32);
    for (std::uint32_t counter = 1; out.size() < len; ++counter) {
        Writer ct;
        ct.u32(counter);
        const auto block = sm3_digest({z, ct.data()});
        out.insert(out.end(), block.bytes.begin(), block.bytes.end());
    }
    out.resize(len);
    return out;
}

Bn message_hash(const PublicKey& p, ByteView message) {
    const auto z = za(p);
    return bn_from(sm3_digest({z.bytes, message}).bytes);
}

}  // namespace

bool is_valid_private(const PrivateKey& d) {
    auto v = bn_from(d.bytes);
    return in_range(v.get(), curve().n_minus_2.get());
}

bool is_valid_public(const PublicKey& p) {
    auto c = ctx();
    return decode_point(p.bytes, c.get()) != nullptr;
}

PublicKey derive_public(const PrivateKey& d) {
    if (!is_valid_private(d)) throw Error(ErrorCode::invalid_argument, "SM2 private key out of range");
    auto c = ctx();
    auto scalar = bn_from(d.bytes);
    auto p = new_point();
    check(EC_POINT_mul(curve().group.get(), p.get(), scalar.get(), nullptr, nullptr, c.get()));
    return encode_point(p.get(), c.get());
}

PrivateKey random_private(RandomSource& rng) {
    for (;;) {
        auto d = rng.draw<PrivateKey>();
        if (is_valid_private(d)) return d;
    }
}

Digest za(const PublicKey& p, std::string_view user_id) {
    const auto& cv = curve();
    const std::uint16_t entl = static_cast<std::uint16_t>(user_id.size() * 8);
    const std::uint8_t entl_bytes[2] = {static_cast<std::uint8_t>(entl >> 8), static_cast<std::uint8_t>(entl)};
    const ByteView xy(p.bytes.data() + 1, 64);
    return sm3_digest({entl_bytes, as_bytes(user_id), cv.a, cv.b, cv.gx, cv.gy, xy});
}

SignatureBytes sign(const PrivateKey& d, const PublicKey& p, ByteView message) {
    if (!is_valid_private(d)) throw Error(ErrorCode::invalid_argument, "SM2 private key out of range");
    const auto& cv = curve();
    auto c = ctx();
    auto e = message_hash(p, message);
    auto dk = bn_from(d.bytes);
    const auto e_bytes = to32(e.get());

    auto one_plus_d = bn();
    check(BN_copy(one_plus_d.get(), dk.get()) != nullptr ? 1 : 0);
    check(BN_add_word(one_plus_d.get(), 1));
    Bn inv(BN_mod_inverse(nullptr, one_plus_d.get(), cv.n.get(), c.get()));
    if (!inv) throw Error(ErrorCode::invalid_argument, "SM2 private key not invertible");

    auto kp = new_point();
    auto r = bn(), s = bn(), x1 = bn(), tmp = bn();
    for (std::uint32_t counter = 0;; ++counter) {
        Writer ctr;
        ctr.u32(counter);
        const auto kd = sm3_digest({as_bytes("peerchain/sm2-nonce"), d.bytes, e_bytes, ctr.data()});
        auto k = bn_from(kd.bytes);
        if (!in_range(k.get(), cv.n_minus_1.get())) continue;

        check(EC_POINT_mul(cv.group.get(), kp.get(), k.get(), nullptr, nullptr, c.get()));
        check(EC_POINT_get_affine_coordinates(cv.group.get(), kp.get(), x1.get(), nullptr, c.get()));
        check(BN_mod_add(r.get(), e.get(), x1.get(), cv.n.get(), c.get()));
        if (BN_is_zero(r.get())) continue;
        check(BN_add(tmp.get(), r.get(), k.get()));
        if (BN_cmp(tmp.get(), cv.n.get()) == 0) continue;

        // s = (1 + d)^-1 * (k - r*d) mod n
        check(BN_mod_mul(tmp.get(), r.get(), dk.get(), cv.n.get(), c.get()));
        check(BN_mod_sub(tmp.get(), k.get(), tmp.get(), cv.n.get(), c.get()));
        check(BN_mod_mul(s.get(), inv.get(), tmp.get(), cv.n.get(), c.get()));
        if (BN_is_zero(s.get())) continue;
        break;
    }

    SignatureBytes out;
    BN_bn2binpad(r.get(), out.bytes.data(), 32);
    BN_bn2binpad(s.get(), out.bytes.data() + 32, 32);
    return out;
}

bool verify(const PublicKey& p, ByteView message, ByteView signature) {
    if (signature.size() != 64) return false;
    try {
        const auto& cv = curve();
        auto c = ctx();
        auto pub = decode_point(p.bytes, c.get());
        if (!pub) return false;
        auto r = bn_from(signature.first(32));
        auto s = bn_from(signature.subspan(32, 32));
        if (!in_range(r.get(), cv.n_minus_1.get()) || !in_range(s.get(), cv.n_minus_1.get())) return false;

        auto t = bn();
        check(BN_mod_add(t.get(), r.get(), s.get(), cv.n.get(), c.get()));
        if (BN_is_zero(t.get())) return false;

        auto pt = new_point();
        check(EC_POINT_mul(cv.group.get(), pt.get(), s.get(), pub.get(), t.get(), c.get()));
        if (EC_POINT_is_at_infinity(cv.group.get(), pt.get())) return false;
        auto x1 = bn();
        check(EC_POINT_get_affine_coordinates(cv.group.get(), pt.get(), x1.get(), nullptr, c.get()));

        auto e = message_hash(p, message);
        auto big_r = bn();
        check(BN_mod_add(big_r.get(), e.get(), x1.get(), cv.n.get(), c.get()));
        return BN_cmp(big_r.get(), r.get()) == 0;
    } catch (const std::exception&) {
        return false;
    }
}

Bytes encrypt(const PublicKey& p, ByteView message, RandomSource& rng) {
    const auto& cv = curve();
    auto c = ctx();
    auto pub = decode_point(p.bytes, c.get());
    if (!pub) throw Error(ErrorCode::invalid_argument, "invalid SM2 public key");

    auto c1 = new_point();
    auto shared = new_point();
    for (;;) {
        const auto k_bytes = random_private(rng);
        auto k = bn_from(k_bytes.bytes);
        check(EC_POINT_mul(cv.group.get(), c1.get(), k.get(), nullptr, nullptr, c.get()));
        check(EC_POINT_mul(cv.group.get(), shared.get(), nullptr, pub.get(), k.get(), c.get()));
        std::array<std::uint8_t, 32> x2{}, y2{};
        affine(shared.get(), x2, y2, c.get());

        Bytes z(x2.begin(), x2.end());
        z.insert(z.end(), y2.begin(), y2.end());
        Bytes t = kdf(z, message.size());
        if (!message.empty() && std::all_of(t.begin(), t.end(), [](std::uint8_t v) { return v == 0; })) continue;

        const auto c1_enc = encode_point(c1.get(), c.get());
        const auto c3 = sm3_digest({x2, message, y2});
        Bytes out(c1_enc.bytes.begin(), c1_enc.bytes.end());
        out.insert(out.end(), c3.bytes.begin(), c3.bytes.end());
        for (std::size_t i = 0; i < message.size(); ++i) out.push_back(message[i] ^ t[i]);
        return out;
    }
}

Bytes decrypt(const PrivateKey& d, ByteView ciphertext) {
    if (ciphertext.size() < encryption_overhead) throw Error(ErrorCode::decrypt_failure, "SM2 ciphertext too short");
    if (!is_valid_private(d)) throw Error(ErrorCode::invalid_argument, "SM2 private key out of range");
    const auto& cv = curve();
    auto c = ctx();
    auto c1 = decode_point(ciphertext.first(65), c.get());
    if (!c1) throw Error(ErrorCode::decrypt_failure, "SM2 ciphertext C1 is not a curve point");

    auto k = bn_from(d.bytes);
    auto shared = new_point();
    check(EC_POINT_mul(cv.group.get(), shared.get(), nullptr, c1.get(), k.get(), c.get()));
    std::array<std::uint8_t, 32> x2{}, y2{};
    affine(shared.get(), x2, y2, c.get());

    const ByteView c3 = ciphertext.subspan(65, 32);
    const ByteView c2 = ciphertext.subspan(encryption_overhead);
    Bytes z(x2.begin(), x2.end());
    z.insert(z.end(), y2.begin(), y2.end());
    Bytes t = kdf(z, c2.size());
    Bytes message(c2.size());
    for (std::size_t i = 0; i < c2.size(); ++i) message[i] = c2[i] ^ t[i];

    const auto check_hash = sm3_digest({x2, message, y2});
    if (CRYPTO_memcmp(check_hash.bytes.data(), c3.data(), 32) != 0) {
        OPENSSL_cleanse(message.data(), message.size());
        throw Error(ErrorCode::decrypt_failure, "SM2 ciphertext integrity check failed");
    }
    return message;
}

}  // namespace peerchain::crypto::sm2
