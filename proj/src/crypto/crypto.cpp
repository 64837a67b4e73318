#include "peerchain/crypto/crypto.hpp"

#include "peerchain/crypto/gcm.hpp"
#include "peerchain/error.hpp"

namespace peerchain::crypto {

KeyPair generate_keypair(RandomSource& rng) {
    KeyPair kp;
    kp.private_key = sm2::random_private(rng);
    kp.public_key = sm2::derive_public(kp.private_key);
    return kp;
}

KeyPair generate_keypair(std::optional<ByteView> seed) {
    if (!seed) return generate_keypair(os_random());
    if (seed->size() != 32) {
        throw Error(ErrorCode::invalid_argument, "key generation seed must be 32 bytes",
                    "got " + std::to_string(seed->size()));
    }
    SeededRandom rng(*seed);
    return generate_keypair(rng);
}

SymmetricKey generate_symmetric_key(RandomSource& rng) { return rng.draw<SymmetricKey>(); }

Nonce generate_nonce(RandomSource& rng) { return rng.draw<Nonce>(); }

Bytes sym_encrypt(const SymmetricKey& key, ByteView plaintext, const Nonce& nonce, ByteView aad) {
    return Sm4Gcm(key).seal(nonce, aad, plaintext);
}

Bytes sym_decrypt(const SymmetricKey& key, ByteView ciphertext, const Nonce& nonce, ByteView aad) {
    return Sm4Gcm(key).open(nonce, aad, ciphertext);
}

WrappedKey wrap_key(const PublicKey& recipient, const SymmetricKey& key, RandomSource& rng) {
    return WrappedKey{sm2::encrypt(recipient, key.bytes, rng), derive_address(recipient)};
}

SymmetricKey unwrap_key(const PrivateKey& recipient, const WrappedKey& wrapped) {
    if (wrapped.ciphertext.size() != sm2::encryption_overhead + SymmetricKey::size_bytes) {
        throw Error(ErrorCode::decrypt_failure, "wrapped key has wrong length");
    }
    const Bytes raw = sm2::decrypt(recipient, wrapped.ciphertext);
    return SymmetricKey::from(raw);
}

Bytes seal_secret(const PublicKey& recipient, ByteView secret, RandomSource& rng) {
    return sm2::encrypt(recipient, secret, rng);
}

Bytes open_secret(const PrivateKey& recipient, ByteView sealed) { return sm2::decrypt(recipient, sealed); }

Signature sign(ByteView message, const KeyPair& keys) {
    return Signature{sm2::sign(keys.private_key, keys.public_key, message), derive_address(keys.public_key)};
}

bool verify(const Signature& sig, ByteView message, const PublicKey& pub) {
    return verify(sig.bytes.bytes, message, pub);
}

bool verify(ByteView sig, ByteView message, const PublicKey& pub) { return sm2::verify(pub, message, sig); }

Address derive_address(const PublicKey& pub) {
    if (!sm2::is_valid_public(pub)) throw Error(ErrorCode::invalid_argument, "malformed SM2 public key");
    const auto d = sm3_digest(pub.bytes);
    return Address::from(ByteView(d.bytes.data(), Address::size_bytes));
}

}  // namespace peerchain::crypto
