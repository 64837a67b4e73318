#pragma once

#include "peerchain/bytes.hpp"

namespace peerchain::crypto {

struct DigestTag {};
struct AddressTag {};
struct PublicKeyTag {};
struct PrivateKeyTag {};
struct SymmetricKeyTag {};
struct NonceTag {};
struct SignatureTag {};

/// SM3 output.
using Digest = FixedBytes<32, DigestTag>;
/// First 20 bytes of SM3 over the uncompressed public key encoding.
using Address = FixedBytes<20, AddressTag>;
/// Uncompressed SM2 point: 0x04 || x || y.
using PublicKey = FixedBytes<65, PublicKeyTag>;
/// Big-endian SM2 scalar in [1, n-2].
using PrivateKey = FixedBytes<32, PrivateKeyTag>;
/// SM4 key.
using SymmetricKey = FixedBytes<16, SymmetricKeyTag>;
/// 96-bit GCM nonce.
using Nonce = FixedBytes<12, NonceTag>;
/// r || s, each 32 bytes big-endian.
using SignatureBytes = FixedBytes<64, SignatureTag>;

struct KeyPair {
    PublicKey public_key;
    PrivateKey private_key;
};

struct Signature {
    SignatureBytes bytes;
    Address signer;
};

/// A symmetric key encrypted to one recipient with SM2 public-key encryption
/// (C1 || C3 || C2 layout, 113 bytes for a 16-byte key).
struct WrappedKey {
    Bytes ciphertext;
    Address recipient;

    bool operator==(const WrappedKey&) const = default;
};

}  // namespace peerchain::crypto
