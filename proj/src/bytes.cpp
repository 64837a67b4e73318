#include "peerchain/bytes.hpp"

#include "peerchain/error.hpp"

namespace peerchain {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::already_exists: return "already_exists";
        case ErrorCode::unauthorized: return "unauthorized";
        case ErrorCode::invalid_state: return "invalid_state";
        case ErrorCode::bad_signature: return "bad_signature";
        case ErrorCode::nonce_replay: return "nonce_replay";
        case ErrorCode::insufficient_balance: return "insufficient_balance";
        case ErrorCode::decrypt_failure: return "decrypt_failure";
        case ErrorCode::digest_mismatch: return "digest_mismatch";
        case ErrorCode::tamper_alarm: return "tamper_alarm";
        case ErrorCode::consensus_failed: return "consensus_failed";
        case ErrorCode::stale_timestamp: return "stale_timestamp";
        case ErrorCode::unknown_identity: return "unknown_identity";
        case ErrorCode::replayed_request: return "replayed_request";
        case ErrorCode::rate_limited: return "rate_limited";
        case ErrorCode::corrupt_data: return "corrupt_data";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

std::string to_hex(ByteView data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

namespace {
int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw Error(ErrorCode::invalid_argument, "hex string has odd length");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error(ErrorCode::invalid_argument, "invalid hex character");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

void throw_size_mismatch(std::size_t expected, std::size_t got) {
    throw Error(ErrorCode::invalid_argument,
                "expected " + std::to_string(expected) + " bytes, got " + std::to_string(got));
}

void Writer::u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
}

void Writer::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void Writer::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void Writer::bytes(ByteView v) {
    if (v.size() > 0xffffffffu) throw Error(ErrorCode::invalid_argument, "field too large to encode");
    u32(static_cast<std::uint32_t>(v.size()));
    raw(v);
}

ByteView Reader::raw(std::size_t n) {
    if (n > remaining()) {
        throw Error(ErrorCode::corrupt_data, "truncated encoding",
                    "need " + std::to_string(n) + " bytes at offset " + std::to_string(pos_));
    }
    ByteView out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t Reader::u8() { return raw(1)[0]; }

std::uint16_t Reader::u16() {
    auto b = raw(2);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t Reader::u32() {
    auto b = raw(4);
    std::uint32_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
}

std::uint64_t Reader::u64() {
    auto b = raw(8);
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
}

Bytes Reader::bytes() {
    std::uint32_t n = u32();
    auto b = raw(n);
    return {b.begin(), b.end()};
}

std::string Reader::str() {
    std::uint32_t n = u32();
    return to_string(raw(n));
}

void Reader::expect_done() const {
    if (!done()) {
        throw Error(ErrorCode::corrupt_data, "trailing bytes after encoding",
                    std::to_string(remaining()) + " bytes left");
    }
}

}  // namespace peerchain
