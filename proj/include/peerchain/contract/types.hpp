#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "peerchain/crypto/types.hpp"

namespace peerchain::contract {

using crypto::Address;
using crypto::Digest;
using crypto::PublicKey;
using ArticleId = std::string;
using GroupId = std::string;

enum class Role : std::uint8_t { scholar = 0, expert = 1 };

/// 0: not in review, 1: in review, 2: review finished. Only 0->1->2.
enum class StateFlag : std::uint8_t { not_in_review = 0, in_review = 1, finished = 2 };

enum class Verdict : std::uint8_t { unfavorable = 0, favorable = 1 };

enum class InteractionKind : std::uint8_t { comment = 0, annotation = 1 };

std::string_view role_name(Role r);
std::string_view verdict_name(Verdict v);
std::string_view interaction_kind_name(InteractionKind k);

/// Pass rule: favorable >= expert_quorum AND
/// verdicts / eligible >= ratio_num / ratio_den, evaluated in integers.
struct ThresholdConfig {
    std::uint32_t expert_quorum = 2;
    std::uint32_t ratio_num = 1;
    std::uint32_t ratio_den = 2;

    bool valid() const { return expert_quorum >= 1 && ratio_den >= 1 && ratio_num >= 1 && ratio_num <= ratio_den; }
    bool satisfied(std::size_t favorable, std::size_t verdicts, std::size_t eligible) const {
        return favorable >= expert_quorum &&
               static_cast<std::uint64_t>(verdicts) * ratio_den >= static_cast<std::uint64_t>(ratio_num) * eligible;
    }

    bool operator==(const ThresholdConfig&) const = default;
};

/// Recipient address -> SM2 ciphertext of a symmetric key.
using KeyMap = std::map<Address, Bytes>;

struct UserEntry {
    Address address;
    std::string display_name;
    Role role = Role::scholar;
    std::set<GroupId> groups;
};

struct AuthorityGroup {
    GroupId id;
    PublicKey group_public_key;
    Address group_address;
    std::set<Address> members;
    std::set<Address> experts;
    /// Group private key sealed to each member's public key.
    std::map<Address, Bytes> key_shares;
};

struct ModificationEntry {
    Address modifier;
    std::uint64_t time = 0;
    ArticleId article_id;
    Digest new_digest;
    Digest new_abstract_digest;
};

struct SummaryRecord {
    std::uint32_t version = 0;
    Digest summary_digest;
    std::string generator_id;
    std::vector<std::string> validator_ids;
    std::uint64_t time = 0;
};

struct InteractionEntry {
    std::string comment_id;
    Address author;
    InteractionKind kind = InteractionKind::comment;
    Digest body_digest;
    std::uint32_t version = 0;
    std::uint64_t time = 0;
};

struct FileEntry {
    ArticleId article_id;
    Address uploader;
    GroupId group;
    StateFlag state_flag = StateFlag::not_in_review;
    std::uint32_t version = 1;
    std::uint64_t created_at = 0;
    Digest initial_digest;
    Digest plaintext_digest;
    Digest abstract_digest;
    KeyMap wrapped_keys;
    KeyMap abstract_keys;
    std::map<Address, Verdict> endorsements;
    std::optional<ThresholdConfig> thresholds;
    /// Experts of the group at start_review time, uploader excluded.
    std::set<Address> eligible_experts;
    std::vector<ModificationEntry> modification_log;
    std::vector<SummaryRecord> summaries;
    std::vector<InteractionEntry> interactions;

    std::size_t favorable_count() const;
    /// Plaintext digest recorded for `version` (1-based), if it exists.
    std::optional<Digest> digest_for_version(std::uint32_t version) const;
};

struct State {
    Address admin;
    std::map<Address, UserEntry> users;
    std::map<GroupId, AuthorityGroup> groups;
    std::map<ArticleId, FileEntry> files;
};

/// Identifier rule shared by articles, groups and comments:
/// 1-64 characters from [A-Za-z0-9._-], not starting with '.'.
bool valid_identifier(std::string_view id);
/// Display names: 1-64 Unicode code points of valid UTF-8.
bool valid_display_name(std::string_view name);

}  // namespace peerchain::contract
