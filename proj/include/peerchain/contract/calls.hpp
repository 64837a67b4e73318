#pragma once

#include <map>
#include <variant>

#include "peerchain/contract/types.hpp"

namespace peerchain::contract {

enum class PayloadKind : std::uint8_t {
    genesis = 0x00,
    register_account = 0x01,
    grant_ether = 0x02,
    create_group = 0x03,
    add_member = 0x04,
    remove_member = 0x05,
    set_name = 0x10,
    upload_file = 0x11,
    start_review = 0x12,
    endorse = 0x13,
    update_file = 0x14,
    record_summary = 0x15,
    log_interaction = 0x16,
};

std::string_view kind_name(PayloadKind k);

/// Flat fee per payload kind; genesis is always free. Account registration
/// is an operator bookkeeping record and is free unless overridden.
struct GasSchedule {
    std::uint64_t default_fee = 21;
    std::map<PayloadKind, std::uint64_t> overrides = {{PayloadKind::register_account, 0}};

    std::uint64_t fee(PayloadKind k) const;
    bool operator==(const GasSchedule&) const = default;
};

struct Genesis {
    PublicKey distributor;
    std::uint64_t distributor_balance = 0;
    std::uint64_t grant_amount = 0;
    GasSchedule gas;
};

struct RegisterAccount {
    PublicKey public_key;
    Role role = Role::scholar;
    std::string display_name;
};

struct GrantEther {
    Address to;
};

struct CreateGroup {
    GroupId group_id;
    PublicKey group_public_key;
};

struct AddMember {
    GroupId group_id;
    Address member;
    bool expert = false;
    Bytes key_share;
};

struct RemoveMember {
    GroupId group_id;
    Address member;
};

struct SetName {
    std::string name;
};

struct UploadFile {
    ArticleId article_id;
    Digest plaintext_digest;
    Digest abstract_digest;
    GroupId group;
    KeyMap wrapped_keys;
    KeyMap abstract_keys;
};

struct StartReview {
    ArticleId article_id;
    ThresholdConfig thresholds;
};

struct Endorse {
    ArticleId article_id;
    Verdict verdict = Verdict::favorable;
};

struct UpdateFile {
    ArticleId article_id;
    Digest new_digest;
    Digest new_abstract_digest;
    KeyMap wrapped_keys;
    KeyMap abstract_keys;
};

struct RecordSummary {
    ArticleId article_id;
    Digest summary_digest;
    std::string generator_id;
    std::vector<std::string> validator_ids;
};

struct LogInteraction {
    ArticleId article_id;
    std::string comment_id;
    InteractionKind kind = InteractionKind::comment;
    Digest body_digest;
};

using Payload = std::variant<Genesis, RegisterAccount, GrantEther, CreateGroup, AddMember, RemoveMember, SetName,
                             UploadFile, StartReview, Endorse, UpdateFile, RecordSummary, LogInteraction>;

PayloadKind kind_of(const Payload& p);

void encode_payload(Writer& w, const Payload& p);
Bytes encode_payload(const Payload& p);
/// Throws Error(corrupt_data) on malformed input, including unknown tags and
/// trailing bytes.
Payload decode_payload(ByteView in);

}  // namespace peerchain::contract
