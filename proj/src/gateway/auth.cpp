#include "peerchain/gateway/auth.hpp"

#include <charconv>

namespace peerchain::gateway {

crypto::Digest request_digest(std::string_view method, std::string_view path, std::int64_t timestamp,
                              std::string_view body) {
    Writer w;
    w.str("peerchain/request");
    w.str(method);
    w.str(path);
    w.str(std::to_string(timestamp));
    w.str(body);
    return crypto::sm3_digest(ByteView(w.data()));
}

SignedHeaders sign_request(const crypto::KeyPair& keys, std::string_view method, std::string_view path,
                           std::int64_t timestamp, std::string_view body) {
    const auto d = ledger::make_delegation(keys, request_digest(method, path, timestamp, body));
    return {d.principal.hex(), std::to_string(timestamp), d.principal_signature.hex()};
}

std::int64_t system_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

Authenticator::Authenticator(const ledger::Ledger& ledger, std::int64_t skew_seconds, RateLimit limit, Clock clock)
    : ledger_(ledger), skew_(skew_seconds), limit_(limit), clock_(std::move(clock)) {}

Caller Authenticator::authenticate(std::string_view method, std::string_view path, const std::string* identity,
                                   const std::string* timestamp, const std::string* signature,
                                   std::string_view body) {
    if (!identity || !timestamp || !signature) {
        throw Error(ErrorCode::unauthorized, "signed request required",
                    "missing " + std::string(!identity ? kIdentityHeader : !timestamp ? kTimestampHeader : kSignatureHeader));
    }
    std::int64_t ts = 0;
    const auto* end = timestamp->data() + timestamp->size();
    auto [ptr, ec] = std::from_chars(timestamp->data(), end, ts);
    if (ec != std::errc() || ptr != end || timestamp->empty()) {
        throw Error(ErrorCode::unauthorized, "malformed timestamp header", *timestamp);
    }
    const auto now = clock_();
    if (ts < now - skew_ || ts > now + skew_) {
        throw Error(ErrorCode::stale_timestamp, "request timestamp outside the accepted window",
                    "timestamp=" + *timestamp + " now=" + std::to_string(now));
    }

    Caller caller;
    crypto::SignatureBytes sig;
    try {
        caller.address = crypto::Address::from_hex(*identity);
        sig = crypto::SignatureBytes::from_hex(*signature);
    } catch (const Error& e) {
        throw Error(ErrorCode::unauthorized, "malformed identity or signature header", e.what());
    }
    const auto account = ledger_.find_account(caller.address);
    if (!account) throw Error(ErrorCode::unknown_identity, "identity is not registered", *identity);

    const auto digest = request_digest(method, path, ts, body);
    if (!crypto::verify(sig.view(), digest.view(), account->public_key)) {
        throw Error(ErrorCode::bad_signature, "request signature does not verify", *identity);
    }
    caller.delegation = {caller.address, digest, sig};

    std::lock_guard lock(mu_);
    std::erase_if(seen_, [&](const auto& e) { return e.second < now - skew_; });
    if (!seen_.emplace(digest, ts).second) {
        throw Error(ErrorCode::replayed_request, "request was already received", digest.hex());
    }
    admit_locked(*identity, now);
    return caller;
}

void Authenticator::admit(const std::string& key) {
    std::lock_guard lock(mu_);
    admit_locked(key, clock_());
}

void Authenticator::admit_locked(const std::string& key, std::int64_t now) {
    auto& q = recent_[key];
    while (!q.empty() && q.front() <= now - static_cast<std::int64_t>(limit_.window_seconds)) q.pop_front();
    if (q.size() >= limit_.requests) {
        throw Error(ErrorCode::rate_limited, "too many requests", key);
    }
    q.push_back(now);
}

}  // namespace peerchain::gateway
