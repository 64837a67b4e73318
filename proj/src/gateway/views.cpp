#include "peerchain/gateway/views.hpp"

#include <type_traits>

namespace peerchain::gateway {

using nlohmann::json;

namespace {

json thresholds_json(const contract::ThresholdConfig& t) {
    return {{"quorum", t.expert_quorum}, {"ratio_num", t.ratio_num}, {"ratio_den", t.ratio_den}};
}

json addresses(const contract::KeyMap& m) {
    json out = json::array();
    for (const auto& [a, _] : m) out.push_back(a.hex());
    return out;
}

}  // namespace

json error_json(const Error& e) {
    return {{"code", error_code_name(e.code())}, {"message", e.what()}, {"detail", e.detail()}};
}

json payload_json(const contract::Payload& payload) {
    json j = {{"kind", contract::kind_name(contract::kind_of(payload))}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, contract::Genesis>) {
                j["distributor_public_key"] = p.distributor.hex();
                j["distributor_balance"] = p.distributor_balance;
                j["grant_amount"] = p.grant_amount;
                j["default_fee"] = p.gas.default_fee;
            } else if constexpr (std::is_same_v<T, contract::RegisterAccount>) {
                j["public_key"] = p.public_key.hex();
                j["role"] = contract::role_name(p.role);
                j["display_name"] = p.display_name;
            } else if constexpr (std::is_same_v<T, contract::GrantEther>) {
                j["to"] = p.to.hex();
            } else if constexpr (std::is_same_v<T, contract::CreateGroup>) {
                j["group"] = p.group_id;
                j["group_public_key"] = p.group_public_key.hex();
            } else if constexpr (std::is_same_v<T, contract::AddMember>) {
                j["group"] = p.group_id;
                j["member"] = p.member.hex();
                j["expert"] = p.expert;
            } else if constexpr (std::is_same_v<T, contract::RemoveMember>) {
                j["group"] = p.group_id;
                j["member"] = p.member.hex();
            } else if constexpr (std::is_same_v<T, contract::SetName>) {
                j["name"] = p.name;
            } else if constexpr (std::is_same_v<T, contract::UploadFile>) {
                j["article_id"] = p.article_id;
                j["group"] = p.group;
                j["plaintext_digest"] = p.plaintext_digest.hex();
                j["abstract_digest"] = p.abstract_digest.hex();
                j["key_recipients"] = addresses(p.wrapped_keys);
            } else if constexpr (std::is_same_v<T, contract::StartReview>) {
                j["article_id"] = p.article_id;
                j["thresholds"] = thresholds_json(p.thresholds);
            } else if constexpr (std::is_same_v<T, contract::Endorse>) {
                j["article_id"] = p.article_id;
                j["verdict"] = contract::verdict_name(p.verdict);
            } else if constexpr (std::is_same_v<T, contract::UpdateFile>) {
                j["article_id"] = p.article_id;
                j["new_digest"] = p.new_digest.hex();
                j["new_abstract_digest"] = p.new_abstract_digest.hex();
            } else if constexpr (std::is_same_v<T, contract::RecordSummary>) {
                j["article_id"] = p.article_id;
                j["summary_digest"] = p.summary_digest.hex();
                j["generator"] = p.generator_id;
                j["validators"] = p.validator_ids;
            } else if constexpr (std::is_same_v<T, contract::LogInteraction>) {
                j["article_id"] = p.article_id;
                j["comment_id"] = p.comment_id;
                j["interaction"] = contract::interaction_kind_name(p.kind);
                j["body_digest"] = p.body_digest.hex();
            }
        },
        payload);
    return j;
}

json block_json(const ledger::SealedBlock& sb) {
    const auto& b = sb.block;
    json txs = json::array();
    for (std::size_t i = 0; i < b.txs.size(); ++i) {
        const auto& tx = b.txs[i];
        json t = {{"id", tx.id().hex()},           {"nonce", tx.nonce},
                  {"sender", tx.sender.hex()},     {"gas_fee", tx.gas_fee},
                  {"timestamp", tx.timestamp},     {"payload", payload_json(tx.payload)},
                  {"signature", tx.signature.hex()}};
        if (tx.delegation) {
            t["delegation"] = {{"principal", tx.delegation->principal.hex()},
                               {"request_digest", tx.delegation->request_digest.hex()}};
        }
        if (i < sb.receipts.size()) {
            const auto& r = sb.receipts[i];
            t["receipt"] = {{"ok", r.ok}, {"gas_charged", r.gas_charged}, {"payer", r.payer.hex()}};
            if (!r.ok) {
                t["receipt"]["code"] = error_code_name(r.code);
                t["receipt"]["message"] = r.message;
            }
        }
        txs.push_back(std::move(t));
    }
    return {{"index", b.index},
            {"prev_hash", b.prev_hash.hex()},
            {"block_hash", b.block_hash.hex()},
            {"state_root", b.state_root.hex()},
            {"sealed_at_ms", sb.sealed_at_ms},
            {"transactions", std::move(txs)}};
}

json account_json(const ledger::Account& a, const contract::State& state) {
    json j = {{"address", a.address.hex()},
              {"public_key", a.public_key.hex()},
              {"balance", a.balance},
              {"nonce", a.nonce},
              {"granted", a.granted},
              {"used_requests", a.used_requests.size()}};
    if (auto it = state.users.find(a.address); it != state.users.end()) {
        j["name"] = it->second.display_name;
        j["role"] = contract::role_name(it->second.role);
        j["groups"] = it->second.groups;
    }
    return j;
}

json article_json(const engine::ArticleView& v) {
    json j = {{"article_id", v.article_id},
              {"group", v.group},
              {"uploader", v.uploader.hex()},
              {"access", contract::access_level_name(v.level)},
              {"state_flag", static_cast<int>(v.state_flag)},
              {"version", v.version},
              {"abstract_digest", v.abstract_digest.hex()}};
    if (v.abstract_text) j["abstract"] = *v.abstract_text;
    if (v.plaintext_digest) j["plaintext_digest"] = v.plaintext_digest->hex();
    if (v.thresholds) {
        j["thresholds"] = thresholds_json(*v.thresholds);
        j["favorable"] = v.favorable;
        j["verdicts"] = v.verdicts;
        j["eligible"] = v.eligible;
    }
    j["may_endorse"] = v.may_endorse;
    if (v.plaintext) {
        j["text"] = *v.plaintext;
        json log = json::array();
        for (std::size_t i = 0; i < v.modification_log.size(); ++i) {
            const auto& m = v.modification_log[i];
            log.push_back({{"version", i + 2},
                           {"modifier", m.modifier.hex()},
                           {"time", m.time},
                           {"digest", m.new_digest.hex()},
                           {"abstract_digest", m.new_abstract_digest.hex()}});
        }
        j["modifications"] = std::move(log);
    }
    return j;
}

json comment_json(const engine::CommentView& c) {
    return {{"comment_id", c.comment_id},
            {"author", c.author.hex()},
            {"kind", contract::interaction_kind_name(c.kind)},
            {"version", c.article_version},
            {"time", c.time},
            {"body", c.body}};
}

json verify_json(const ledger::VerifyReport& r, std::uint64_t height) {
    json j = {{"ok", r.ok}, {"height", height}};
    if (!r.ok) {
        j["block"] = r.block ? json(*r.block) : json(nullptr);
        j["reason"] = r.reason;
    }
    return j;
}

}  // namespace peerchain::gateway
