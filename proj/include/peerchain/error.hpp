#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peerchain {

enum class ErrorCode {
    invalid_argument,
    not_found,
    already_exists,
    unauthorized,
    invalid_state,
    bad_signature,
    nonce_replay,
    insufficient_balance,
    decrypt_failure,
    digest_mismatch,
    tamper_alarm,
    consensus_failed,
    stale_timestamp,
    unknown_identity,
    replayed_request,
    rate_limited,
    corrupt_data,
    io_error,
};

std::string_view error_code_name(ErrorCode code);

/// The single exception type used across the library. `code` is stable and is
/// what the HTTP layer reports in its `{code, message, detail}` error body.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string detail = {})
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace peerchain
