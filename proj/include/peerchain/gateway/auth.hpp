#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

#include "peerchain/crypto/crypto.hpp"
#include "peerchain/gateway/config.hpp"
#include "peerchain/ledger/ledger.hpp"

namespace peerchain::gateway {

inline constexpr std::string_view kIdentityHeader = "X-BR-Identity";
inline constexpr std::string_view kTimestampHeader = "X-BR-Timestamp";
inline constexpr std::string_view kSignatureHeader = "X-BR-Signature";

/// SM3 over the canonical request encoding: the tag "peerchain/request",
/// then method, path, decimal timestamp and body, each with a u32 big-endian
/// length prefix. The path excludes any query string.
crypto::Digest request_digest(std::string_view method, std::string_view path, std::int64_t timestamp,
                              std::string_view body);

struct SignedHeaders {
    std::string identity;   // address hex
    std::string timestamp;  // decimal unix seconds
    std::string signature;  // 64-byte r||s, hex
};

/// Client side of the scheme; the signature is also a ledger delegation over
/// the same digest.
SignedHeaders sign_request(const crypto::KeyPair& keys, std::string_view method, std::string_view path,
                           std::int64_t timestamp, std::string_view body);

struct Caller {
    crypto::Address address;
    ledger::Delegation delegation;
};

using Clock = std::function<std::int64_t()>;
std::int64_t system_seconds();

/// Checks, in order: headers present (unauthorized), timestamp within the
/// skew window (stale_timestamp), identity known to the chain
/// (unknown_identity), signature (bad_signature), first use of the digest
/// (replayed_request) and the per-identity rate (rate_limited). Any header
/// that does not parse rejects the request.
class Authenticator {
public:
    Authenticator(const ledger::Ledger& ledger, std::int64_t skew_seconds, RateLimit limit, Clock clock = system_seconds);

    Caller authenticate(std::string_view method, std::string_view path, const std::string* identity,
                        const std::string* timestamp, const std::string* signature, std::string_view body);

    /// Counts an unsigned request against `key`; throws rate_limited.
    void admit(const std::string& key);

    std::int64_t now() const { return clock_(); }

private:
    void admit_locked(const std::string& key, std::int64_t now);

    const ledger::Ledger& ledger_;
    std::int64_t skew_;
    RateLimit limit_;
    Clock clock_;

    std::mutex mu_;
    // digest -> timestamp it carried; dropped once outside the window, after
    // which the timestamp check alone rejects a replay
    std::map<crypto::Digest, std::int64_t> seen_;
    std::map<std::string, std::deque<std::int64_t>> recent_;
};

}  // namespace peerchain::gateway
