#pragma once

#include <optional>
#include <string>

#include "peerchain/contract/calls.hpp"
#include "peerchain/contract/types.hpp"
#include "peerchain/error.hpp"

namespace peerchain::contract {

struct Outcome {
    bool ok = true;
    ErrorCode code = ErrorCode::invalid_argument;
    std::string message;

    static Outcome success() { return {}; }
    static Outcome failure(ErrorCode c, std::string m) { return {false, c, std::move(m)}; }
};

/// Applies one payload on behalf of `caller` at logical time `time`.
/// Either every effect of the payload is applied or none is. Ledger-level
/// payloads (genesis, grant_ether) are rejected here; register_account only
/// creates the user entry.
Outcome execute(State& state, const Address& caller, const Payload& call, std::uint64_t time);

enum class AccessLevel : std::uint8_t { denied = 0, abstract_only = 1, review = 2, full = 3 };

std::string_view access_level_name(AccessLevel level);

/// Policy table, by caller relation to the article and its state flag:
///
///   relation                     flag 0         flag 1         flag 2
///   uploader                     full           full           full
///   eligible expert reviewer     abstract_only  review         full
///   other group member           abstract_only  abstract_only  full
///   outside the group            denied         denied         denied
AccessLevel access_level(const State& state, const Address& caller, const FileEntry& file);

/// A wrapped key addressed to something the caller can open: either the
/// caller's own address, or the group address together with the caller's
/// sealed share of the group private key.
struct ReachableKey {
    crypto::WrappedKey wrapped;
    std::optional<Bytes> group_key_share;
};

struct FileView {
    AccessLevel level = AccessLevel::denied;
    ArticleId article_id;
    Address uploader;
    GroupId group;
    StateFlag state_flag = StateFlag::not_in_review;
    std::uint32_t version = 0;
    Digest abstract_digest;
    std::optional<ReachableKey> abstract_key;
    // review and full
    std::optional<Digest> plaintext_digest;
    std::optional<ThresholdConfig> thresholds;
    std::size_t favorable = 0;
    std::size_t verdicts = 0;
    std::size_t eligible = 0;
    bool caller_may_endorse = false;
    // full only
    std::optional<ReachableKey> article_key;
    std::vector<ModificationEntry> modification_log;
};

/// Throws Error(not_found) for an unknown article and Error(unauthorized) for
/// a caller outside the article's group.
FileView get_file(const State& state, const Address& caller, const ArticleId& id);

/// Articles the caller may open at any level, in id order.
std::vector<ArticleId> visible_articles(const State& state, const Address& caller);

void encode_state(Writer& w, const State& state);

}  // namespace peerchain::contract
