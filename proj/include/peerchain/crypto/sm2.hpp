#pragma once

#include <string_view>

#include "peerchain/crypto/random.hpp"
#include "peerchain/crypto/types.hpp"

/// SM2 (GB/T 32918) signatures and public-key encryption over the
/// recommended 256-bit curve. Field and point arithmetic come from OpenSSL's
/// EC_GROUP for NID_sm2; the schemes themselves are implemented here.
namespace peerchain::crypto::sm2 {

/// Distinguishing identifier hashed into Z_A. Every signature in the system
/// uses this value (the customary default from GM/T 0009).
inline constexpr std::string_view default_user_id = "1234567812345678";

bool is_valid_private(const PrivateKey& d);
/// Uncompressed encoding, on the curve, not the point at infinity.
bool is_valid_public(const PublicKey& p);

/// Throws Error(invalid_argument) for an out-of-range scalar.
PublicKey derive_public(const PrivateKey& d);
/// Rejection-samples a scalar in [1, n-2].
PrivateKey random_private(RandomSource& rng);

Digest za(const PublicKey& p, std::string_view user_id = default_user_id);

/// e = SM3(Z_A || message); the per-signature nonce k is derived
/// deterministically from (d, e), so equal inputs give equal signatures.
SignatureBytes sign(const PrivateKey& d, const PublicKey& p, ByteView message);
/// Never throws: malformed keys or signatures verify as false.
bool verify(const PublicKey& p, ByteView message, ByteView signature);

/// Output layout C1 (65) || C3 (32) || C2 (|message|).
Bytes encrypt(const PublicKey& p, ByteView message, RandomSource& rng);
/// Throws Error(decrypt_failure) when C1 is invalid or C3 does not match.
Bytes decrypt(const PrivateKey& d, ByteView ciphertext);

inline constexpr std::size_t encryption_overhead = 65 + 32;

}  // namespace peerchain::crypto::sm2
