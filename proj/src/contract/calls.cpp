#include "peerchain/contract/calls.hpp"

#include "peerchain/error.hpp"

namespace peerchain::contract {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void put_keys(Writer& w, const KeyMap& keys) {
    w.u32(static_cast<std::uint32_t>(keys.size()));
    for (const auto& [addr, ct] : keys) {
        w.fixed(addr);
        w.bytes(ct);
    }
}

KeyMap get_keys(Reader& r) {
    KeyMap keys;
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        auto addr = r.fixed<Address>();
        auto ct = r.bytes();
        if (!keys.emplace(addr, std::move(ct)).second) {
            throw Error(ErrorCode::corrupt_data, "duplicate recipient in key map");
        }
    }
    return keys;
}

void put_gas(Writer& w, const GasSchedule& g) {
    w.u64(g.default_fee);
    w.u32(static_cast<std::uint32_t>(g.overrides.size()));
    for (const auto& [kind, fee] : g.overrides) {
        w.u8(static_cast<std::uint8_t>(kind));
        w.u64(fee);
    }
}

GasSchedule get_gas(Reader& r) {
    GasSchedule g;
    g.default_fee = r.u64();
    g.overrides.clear();  // the encoding is the whole schedule, not a patch on the defaults
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        auto kind = static_cast<PayloadKind>(r.u8());
        if (!g.overrides.emplace(kind, r.u64()).second) throw Error(ErrorCode::corrupt_data, "repeated gas override");
    }
    return g;
}

template <typename Enum>
Enum get_enum(Reader& r, std::uint8_t max) {
    const std::uint8_t v = r.u8();
    if (v > max) throw Error(ErrorCode::corrupt_data, "enum value out of range");
    return static_cast<Enum>(v);
}

}  // namespace

std::string_view kind_name(PayloadKind k) {
    switch (k) {
        case PayloadKind::genesis: return "genesis";
        case PayloadKind::register_account: return "register_account";
        case PayloadKind::grant_ether: return "grant_ether";
        case PayloadKind::create_group: return "create_group";
        case PayloadKind::add_member: return "add_member";
        case PayloadKind::remove_member: return "remove_member";
        case PayloadKind::set_name: return "set_name";
        case PayloadKind::upload_file: return "upload_file";
        case PayloadKind::start_review: return "start_review";
        case PayloadKind::endorse: return "endorse";
        case PayloadKind::update_file: return "update_file";
        case PayloadKind::record_summary: return "record_summary";
        case PayloadKind::log_interaction: return "log_interaction";
    }
    return "unknown";
}

std::uint64_t GasSchedule::fee(PayloadKind k) const {
    if (k == PayloadKind::genesis) return 0;
    auto it = overrides.find(k);
    return it == overrides.end() ? default_fee : it->second;
}

PayloadKind kind_of(const Payload& p) {
    return std::visit(overloaded{
                          [](const Genesis&) { return PayloadKind::genesis; },
                          [](const RegisterAccount&) { return PayloadKind::register_account; },
                          [](const GrantEther&) { return PayloadKind::grant_ether; },
                          [](const CreateGroup&) { return PayloadKind::create_group; },
                          [](const AddMember&) { return PayloadKind::add_member; },
                          [](const RemoveMember&) { return PayloadKind::remove_member; },
                          [](const SetName&) { return PayloadKind::set_name; },
                          [](const UploadFile&) { return PayloadKind::upload_file; },
                          [](const StartReview&) { return PayloadKind::start_review; },
                          [](const Endorse&) { return PayloadKind::endorse; },
                          [](const UpdateFile&) { return PayloadKind::update_file; },
                          [](const RecordSummary&) { return PayloadKind::record_summary; },
                          [](const LogInteraction&) { return PayloadKind::log_interaction; },
                      },
                      p);
}

void encode_payload(Writer& w, const Payload& p) {
    w.u8(static_cast<std::uint8_t>(kind_of(p)));
    std::visit(overloaded{
                   [&](const Genesis& g) {
                       w.fixed(g.distributor);
                       w.u64(g.distributor_balance);
                       w.u64(g.grant_amount);
                       put_gas(w, g.gas);
                   },
                   [&](const RegisterAccount& c) {
                       w.fixed(c.public_key);
                       w.u8(static_cast<std::uint8_t>(c.role));
                       w.str(c.display_name);
                   },
                   [&](const GrantEther& c) { w.fixed(c.to); },
                   [&](const CreateGroup& c) {
                       w.str(c.group_id);
                       w.fixed(c.group_public_key);
                   },
                   [&](const AddMember& c) {
                       w.str(c.group_id);
                       w.fixed(c.member);
                       w.u8(c.expert ? 1 : 0);
                       w.bytes(c.key_share);
                   },
                   [&](const RemoveMember& c) {
                       w.str(c.group_id);
                       w.fixed(c.member);
                   },
                   [&](const SetName& c) { w.str(c.name); },
                   [&](const UploadFile& c) {
                       w.str(c.article_id);
                       w.fixed(c.plaintext_digest);
                       w.fixed(c.abstract_digest);
                       w.str(c.group);
                       put_keys(w, c.wrapped_keys);
                       put_keys(w, c.abstract_keys);
                   },
                   [&](const StartReview& c) {
                       w.str(c.article_id);
                       w.u32(c.thresholds.expert_quorum);
                       w.u32(c.thresholds.ratio_num);
                       w.u32(c.thresholds.ratio_den);
                   },
                   [&](const Endorse& c) {
                       w.str(c.article_id);
                       w.u8(static_cast<std::uint8_t>(c.verdict));
                   },
                   [&](const UpdateFile& c) {
                       w.str(c.article_id);
                       w.fixed(c.new_digest);
                       w.fixed(c.new_abstract_digest);
                       put_keys(w, c.wrapped_keys);
                       put_keys(w, c.abstract_keys);
                   },
                   [&](const RecordSummary& c) {
                       w.str(c.article_id);
                       w.fixed(c.summary_digest);
                       w.str(c.generator_id);
                       w.u32(static_cast<std::uint32_t>(c.validator_ids.size()));
                       for (const auto& v : c.validator_ids) w.str(v);
                   },
                   [&](const LogInteraction& c) {
                       w.str(c.article_id);
                       w.str(c.comment_id);
                       w.u8(static_cast<std::uint8_t>(c.kind));
                       w.fixed(c.body_digest);
                   },
               },
               p);
}

Bytes encode_payload(const Payload& p) {
    Writer w;
    encode_payload(w, p);
    return std::move(w).take();
}

Payload decode_payload(ByteView in) {
    Reader r(in);
    const auto tag = static_cast<PayloadKind>(r.u8());
    Payload out;
    switch (tag) {
        case PayloadKind::genesis: {
            Genesis g;
            g.distributor = r.fixed<PublicKey>();
            g.distributor_balance = r.u64();
            g.grant_amount = r.u64();
            g.gas = get_gas(r);
            out = std::move(g);
            break;
        }
        case PayloadKind::register_account: {
            RegisterAccount c;
            c.public_key = r.fixed<PublicKey>();
            c.role = get_enum<Role>(r, 1);
            c.display_name = r.str();
            out = std::move(c);
            break;
        }
        case PayloadKind::grant_ether: out = GrantEther{r.fixed<Address>()}; break;
        case PayloadKind::create_group: {
            CreateGroup c;
            c.group_id = r.str();
            c.group_public_key = r.fixed<PublicKey>();
            out = std::move(c);
            break;
        }
        case PayloadKind::add_member: {
            AddMember c;
            c.group_id = r.str();
            c.member = r.fixed<Address>();
            c.expert = get_enum<std::uint8_t>(r, 1) == 1;
            c.key_share = r.bytes();
            out = std::move(c);
            break;
        }
        case PayloadKind::remove_member: {
            RemoveMember c;
            c.group_id = r.str();
            c.member = r.fixed<Address>();
            out = std::move(c);
            break;
        }
        case PayloadKind::set_name: out = SetName{r.str()}; break;
        case PayloadKind::upload_file: {
            UploadFile c;
            c.article_id = r.str();
            c.plaintext_digest = r.fixed<Digest>();
            c.abstract_digest = r.fixed<Digest>();
            c.group = r.str();
            c.wrapped_keys = get_keys(r);
            c.abstract_keys = get_keys(r);
            out = std::move(c);
            break;
        }
        case PayloadKind::start_review: {
            StartReview c;
            c.article_id = r.str();
            c.thresholds.expert_quorum = r.u32();
            c.thresholds.ratio_num = r.u32();
            c.thresholds.ratio_den = r.u32();
            out = std::move(c);
            break;
        }
        case PayloadKind::endorse: {
            Endorse c;
            c.article_id = r.str();
            c.verdict = get_enum<Verdict>(r, 1);
            out = std::move(c);
            break;
        }
        case PayloadKind::update_file: {
            UpdateFile c;
            c.article_id = r.str();
            c.new_digest = r.fixed<Digest>();
            c.new_abstract_digest = r.fixed<Digest>();
            c.wrapped_keys = get_keys(r);
            c.abstract_keys = get_keys(r);
            out = std::move(c);
            break;
        }
        case PayloadKind::record_summary: {
            RecordSummary c;
            c.article_id = r.str();
            c.summary_digest = r.fixed<Digest>();
            c.generator_id = r.str();
            const std::uint32_t n = r.u32();
            if (n > 16) throw Error(ErrorCode::corrupt_data, "too many validator ids");
            for (std::uint32_t i = 0; i < n; ++i) c.validator_ids.push_back(r.str());
            out = std::move(c);
            break;
        }
        case PayloadKind::log_interaction: {
            LogInteraction c;
            c.article_id = r.str();
            c.comment_id = r.str();
            c.kind = get_enum<InteractionKind>(r, 1);
            c.body_digest = r.fixed<Digest>();
            out = std::move(c);
            break;
        }
        default: throw Error(ErrorCode::corrupt_data, "unknown payload tag", std::to_string(static_cast<int>(tag)));
    }
    r.expect_done();
    return out;
}

}  // namespace peerchain::contract
