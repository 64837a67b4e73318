#pragma once

#include <optional>

#include "peerchain/crypto/random.hpp"
#include "peerchain/crypto/sm2.hpp"
#include "peerchain/crypto/sm3.hpp"
#include "peerchain/crypto/types.hpp"

namespace peerchain::crypto {

/// Fresh pair from OS randomness, or a reproducible pair from a 32-byte seed.
/// A seed of any other length throws Error(invalid_argument).
KeyPair generate_keypair(std::optional<ByteView> seed = std::nullopt);
KeyPair generate_keypair(RandomSource& rng);

SymmetricKey generate_symmetric_key(RandomSource& rng = os_random());
Nonce generate_nonce(RandomSource& rng = os_random());

/// SM4-GCM. Output is ciphertext || 16-byte tag; `aad` is authenticated but
/// not encrypted. Decryption failures throw Error(decrypt_failure).
Bytes sym_encrypt(const SymmetricKey& key, ByteView plaintext, const Nonce& nonce, ByteView aad = {});
Bytes sym_decrypt(const SymmetricKey& key, ByteView ciphertext, const Nonce& nonce, ByteView aad = {});

WrappedKey wrap_key(const PublicKey& recipient, const SymmetricKey& key, RandomSource& rng = os_random());
/// Throws Error(decrypt_failure) for the wrong private key or corrupted bytes.
SymmetricKey unwrap_key(const PrivateKey& recipient, const WrappedKey& wrapped);

/// SM2-encrypt arbitrary secret bytes (used to hand group private keys to
/// members).
Bytes seal_secret(const PublicKey& recipient, ByteView secret, RandomSource& rng = os_random());
Bytes open_secret(const PrivateKey& recipient, ByteView sealed);

Signature sign(ByteView message, const KeyPair& keys);
bool verify(const Signature& sig, ByteView message, const PublicKey& pub);
bool verify(ByteView sig, ByteView message, const PublicKey& pub);

/// First 20 bytes of SM3(public key encoding). Throws Error(invalid_argument)
/// for an encoding that is not a valid curve point.
Address derive_address(const PublicKey& pub);

}  // namespace peerchain::crypto
