#include "peerchain/contract/contract.hpp"

#include <algorithm>

#include "peerchain/crypto/crypto.hpp"

namespace peerchain::contract {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Outcome fail(ErrorCode c, std::string m) { return Outcome::failure(c, std::move(m)); }

bool valid_point(const PublicKey& pub) {
    try {
        (void)crypto::derive_address(pub);
        return true;
    } catch (const Error&) {
        return false;
    }
}

// Uploads and updates must address the key to the uploader and to the group.
Outcome check_key_coverage(const State& s, const FileEntry& f, const KeyMap& keys, const KeyMap& abstract_keys) {
    const auto& group_addr = s.groups.at(f.group).group_address;
    for (const KeyMap* m : {&keys, &abstract_keys}) {
        if (!m->contains(f.uploader) || !m->contains(group_addr)) {
            return fail(ErrorCode::invalid_argument, "wrapped keys must cover the uploader and the group");
        }
        for (const auto& [addr, ct] : *m) {
            if (ct.empty()) return fail(ErrorCode::invalid_argument, "empty wrapped key");
        }
    }
    return Outcome::success();
}

class Executor {
public:
    Executor(State& s, const Address& caller, std::uint64_t time) : s_(s), caller_(caller), time_(time) {}

    Outcome operator()(const Genesis&) { return ledger_only(); }
    Outcome operator()(const GrantEther&) { return ledger_only(); }

    Outcome operator()(const RegisterAccount& c) {
        if (auto o = require_admin(); !o.ok) return o;
        if (!valid_point(c.public_key)) return fail(ErrorCode::invalid_argument, "invalid public key");
        if (!valid_display_name(c.display_name)) return fail(ErrorCode::invalid_argument, "invalid display name");
        const Address addr = crypto::derive_address(c.public_key);
        if (s_.users.contains(addr)) return fail(ErrorCode::already_exists, "account already registered");
        s_.users.emplace(addr, UserEntry{addr, c.display_name, c.role, {}});
        return Outcome::success();
    }

    Outcome operator()(const CreateGroup& c) {
        if (auto o = require_admin(); !o.ok) return o;
        if (!valid_identifier(c.group_id)) return fail(ErrorCode::invalid_argument, "invalid group id");
        if (s_.groups.contains(c.group_id)) return fail(ErrorCode::already_exists, "group exists");
        if (!valid_point(c.group_public_key)) return fail(ErrorCode::invalid_argument, "invalid group public key");
        AuthorityGroup g;
        g.id = c.group_id;
        g.group_public_key = c.group_public_key;
        g.group_address = crypto::derive_address(c.group_public_key);
        s_.groups.emplace(c.group_id, std::move(g));
        return Outcome::success();
    }

    Outcome operator()(const AddMember& c) {
        if (auto o = require_admin(); !o.ok) return o;
        auto git = s_.groups.find(c.group_id);
        if (git == s_.groups.end()) return fail(ErrorCode::not_found, "unknown group");
        auto uit = s_.users.find(c.member);
        if (uit == s_.users.end()) return fail(ErrorCode::not_found, "member is not registered");
        auto& g = git->second;
        if (g.members.contains(c.member)) return fail(ErrorCode::already_exists, "already a member");
        if (c.expert && uit->second.role != Role::expert) {
            return fail(ErrorCode::invalid_argument, "only expert accounts can join as experts");
        }
        if (c.key_share.empty()) return fail(ErrorCode::invalid_argument, "missing group key share");
        g.members.insert(c.member);
        if (c.expert) g.experts.insert(c.member);
        g.key_shares[c.member] = c.key_share;
        uit->second.groups.insert(c.group_id);
        return Outcome::success();
    }

    Outcome operator()(const RemoveMember& c) {
        if (auto o = require_admin(); !o.ok) return o;
        auto git = s_.groups.find(c.group_id);
        if (git == s_.groups.end()) return fail(ErrorCode::not_found, "unknown group");
        auto& g = git->second;
        if (!g.members.contains(c.member)) return fail(ErrorCode::not_found, "not a member");
        g.members.erase(c.member);
        g.experts.erase(c.member);
        g.key_shares.erase(c.member);
        s_.users.at(c.member).groups.erase(c.group_id);
        return Outcome::success();
    }

    Outcome operator()(const SetName& c) {
        auto it = s_.users.find(caller_);
        if (it == s_.users.end()) return fail(ErrorCode::unknown_identity, "caller is not registered");
        if (!valid_display_name(c.name)) return fail(ErrorCode::invalid_argument, "name must be 1-64 characters");
        it->second.display_name = c.name;
        return Outcome::success();
    }

    Outcome operator()(const UploadFile& c) {
        if (!s_.users.contains(caller_)) return fail(ErrorCode::unknown_identity, "caller is not registered");
        if (!valid_identifier(c.article_id)) return fail(ErrorCode::invalid_argument, "invalid article id");
        if (s_.files.contains(c.article_id)) return fail(ErrorCode::already_exists, "duplicate article id");
        auto git = s_.groups.find(c.group);
        if (git == s_.groups.end()) return fail(ErrorCode::not_found, "unknown group");
        if (!git->second.members.contains(caller_)) return fail(ErrorCode::unauthorized, "uploader not in group");
        FileEntry f;
        f.article_id = c.article_id;
        f.uploader = caller_;
        f.group = c.group;
        f.created_at = time_;
        f.initial_digest = c.plaintext_digest;
        f.plaintext_digest = c.plaintext_digest;
        f.abstract_digest = c.abstract_digest;
        if (auto o = check_key_coverage(s_, f, c.wrapped_keys, c.abstract_keys); !o.ok) return o;
        f.wrapped_keys = c.wrapped_keys;
        f.abstract_keys = c.abstract_keys;
        s_.files.emplace(c.article_id, std::move(f));
        return Outcome::success();
    }

    Outcome operator()(const StartReview& c) {
        auto it = s_.files.find(c.article_id);
        if (it == s_.files.end()) return fail(ErrorCode::not_found, "unknown article");
        auto& f = it->second;
        if (f.uploader != caller_) return fail(ErrorCode::unauthorized, "only the uploader can start review");
        if (f.state_flag != StateFlag::not_in_review) return fail(ErrorCode::invalid_state, "article is not at flag 0");
        if (!c.thresholds.valid()) return fail(ErrorCode::invalid_argument, "invalid thresholds");
        f.eligible_experts = s_.groups.at(f.group).experts;
        f.eligible_experts.erase(f.uploader);
        f.thresholds = c.thresholds;
        f.state_flag = StateFlag::in_review;
        return Outcome::success();
    }

    Outcome operator()(const Endorse& c) {
        auto it = s_.files.find(c.article_id);
        if (it == s_.files.end()) return fail(ErrorCode::not_found, "unknown article");
        auto& f = it->second;
        if (f.state_flag != StateFlag::in_review) return fail(ErrorCode::invalid_state, "article is not in review");
        if (caller_ == f.uploader) return fail(ErrorCode::unauthorized, "uploader cannot endorse");
        if (!f.eligible_experts.contains(caller_) || !s_.groups.at(f.group).experts.contains(caller_)) {
            return fail(ErrorCode::unauthorized, "caller is not an eligible expert");
        }
        if (f.endorsements.contains(caller_)) return fail(ErrorCode::already_exists, "verdict already cast");
        f.endorsements.emplace(caller_, c.verdict);
        if (f.thresholds->satisfied(f.favorable_count(), f.endorsements.size(), f.eligible_experts.size())) {
            f.state_flag = StateFlag::finished;
        }
        return Outcome::success();
    }

    Outcome operator()(const UpdateFile& c) {
        auto it = s_.files.find(c.article_id);
        if (it == s_.files.end()) return fail(ErrorCode::not_found, "unknown article");
        auto& f = it->second;
        if (access_level(s_, caller_, f) != AccessLevel::full) {
            return fail(ErrorCode::unauthorized, "caller has no full-text access");
        }
        if (auto o = check_key_coverage(s_, f, c.wrapped_keys, c.abstract_keys); !o.ok) return o;
        f.modification_log.push_back({caller_, time_, f.article_id, c.new_digest, c.new_abstract_digest});
        f.version += 1;
        f.plaintext_digest = c.new_digest;
        f.abstract_digest = c.new_abstract_digest;
        f.wrapped_keys = c.wrapped_keys;
        f.abstract_keys = c.abstract_keys;
        return Outcome::success();
    }

    Outcome operator()(const RecordSummary& c) {
        if (auto o = require_admin(); !o.ok) return o;
        auto it = s_.files.find(c.article_id);
        if (it == s_.files.end()) return fail(ErrorCode::not_found, "unknown article");
        if (c.validator_ids.size() != 2) return fail(ErrorCode::invalid_argument, "exactly two validators required");
        if (c.validator_ids[0] == c.validator_ids[1]) return fail(ErrorCode::invalid_argument, "validators must differ");
        if (std::find(c.validator_ids.begin(), c.validator_ids.end(), c.generator_id) != c.validator_ids.end()) {
            return fail(ErrorCode::invalid_argument, "generator cannot validate itself");
        }
        auto& f = it->second;
        f.abstract_digest = c.summary_digest;
        f.summaries.push_back({f.version, c.summary_digest, c.generator_id, c.validator_ids, time_});
        return Outcome::success();
    }

    Outcome operator()(const LogInteraction& c) {
        auto it = s_.files.find(c.article_id);
        if (it == s_.files.end()) return fail(ErrorCode::not_found, "unknown article");
        auto& f = it->second;
        if (access_level(s_, caller_, f) != AccessLevel::full) {
            return fail(ErrorCode::unauthorized, "caller has no full-text access");
        }
        if (!valid_identifier(c.comment_id)) return fail(ErrorCode::invalid_argument, "invalid comment id");
        const bool dup = std::any_of(f.interactions.begin(), f.interactions.end(),
                                     [&](const InteractionEntry& e) { return e.comment_id == c.comment_id; });
        if (dup) return fail(ErrorCode::already_exists, "duplicate comment id");
        f.interactions.push_back({c.comment_id, caller_, c.kind, c.body_digest, f.version, time_});
        return Outcome::success();
    }

private:
    Outcome ledger_only() { return fail(ErrorCode::invalid_argument, "payload is handled by the ledger"); }

    Outcome require_admin() {
        if (caller_ != s_.admin) return fail(ErrorCode::unauthorized, "administrator only");
        return Outcome::success();
    }

    State& s_;
    const Address& caller_;
    std::uint64_t time_;
};

std::optional<ReachableKey> reachable(const State& s, const Address& caller, const FileEntry& f, const KeyMap& keys) {
    if (auto it = keys.find(caller); it != keys.end()) {
        return ReachableKey{{it->second, caller}, std::nullopt};
    }
    auto git = s.groups.find(f.group);
    if (git == s.groups.end()) return std::nullopt;
    const auto& g = git->second;
    auto share = g.key_shares.find(caller);
    auto wk = keys.find(g.group_address);
    if (share == g.key_shares.end() || wk == keys.end()) return std::nullopt;
    return ReachableKey{{wk->second, g.group_address}, share->second};
}

void put_keys(Writer& w, const KeyMap& keys) {
    w.u32(static_cast<std::uint32_t>(keys.size()));
    for (const auto& [addr, ct] : keys) {
        w.fixed(addr);
        w.bytes(ct);
    }
}

void put_addresses(Writer& w, const std::set<Address>& s) {
    w.u32(static_cast<std::uint32_t>(s.size()));
    for (const auto& a : s) w.fixed(a);
}

}  // namespace

Outcome execute(State& state, const Address& caller, const Payload& call, std::uint64_t time) {
    return std::visit(Executor(state, caller, time), call);
}

std::string_view access_level_name(AccessLevel level) {
    switch (level) {
        case AccessLevel::denied: return "denied";
        case AccessLevel::abstract_only: return "abstract_only";
        case AccessLevel::review: return "review";
        case AccessLevel::full: return "full";
    }
    return "denied";
}

// TODO: wrap the article key to the group address only in the transaction that
// reaches flag 2, so members cannot open it early with their group share.
AccessLevel access_level(const State& state, const Address& caller, const FileEntry& file) {
    if (caller == file.uploader) return AccessLevel::full;
    auto git = state.groups.find(file.group);
    if (git == state.groups.end() || !git->second.members.contains(caller)) return AccessLevel::denied;
    switch (file.state_flag) {
        case StateFlag::finished: return AccessLevel::full;
        case StateFlag::in_review:
            return file.eligible_experts.contains(caller) && git->second.experts.contains(caller)
                       ? AccessLevel::review
                       : AccessLevel::abstract_only;
        case StateFlag::not_in_review: return AccessLevel::abstract_only;
    }
    return AccessLevel::denied;
}

FileView get_file(const State& state, const Address& caller, const ArticleId& id) {
    auto it = state.files.find(id);
    if (it == state.files.end()) throw Error(ErrorCode::not_found, "unknown article", id);
    const auto& f = it->second;
    FileView v;
    v.level = access_level(state, caller, f);
    if (v.level == AccessLevel::denied) throw Error(ErrorCode::unauthorized, "caller is outside the article's group", id);
    v.article_id = f.article_id;
    v.uploader = f.uploader;
    v.group = f.group;
    v.state_flag = f.state_flag;
    v.version = f.version;
    v.abstract_digest = f.abstract_digest;
    v.abstract_key = reachable(state, caller, f, f.abstract_keys);
    if (v.level >= AccessLevel::review) {
        v.plaintext_digest = f.plaintext_digest;
        v.thresholds = f.thresholds;
        v.favorable = f.favorable_count();
        v.verdicts = f.endorsements.size();
        v.eligible = f.eligible_experts.size();
        v.caller_may_endorse = f.state_flag == StateFlag::in_review && v.level == AccessLevel::review &&
                               !f.endorsements.contains(caller);
    }
    if (v.level == AccessLevel::full) {
        v.article_key = reachable(state, caller, f, f.wrapped_keys);
        v.modification_log = f.modification_log;
    }
    return v;
}

std::vector<ArticleId> visible_articles(const State& state, const Address& caller) {
    std::vector<ArticleId> out;
    for (const auto& [id, f] : state.files) {
        if (access_level(state, caller, f) != AccessLevel::denied) out.push_back(id);
    }
    return out;
}

void encode_state(Writer& w, const State& s) {
    w.fixed(s.admin);
    w.u32(static_cast<std::uint32_t>(s.users.size()));
    for (const auto& [addr, u] : s.users) {
        w.fixed(addr);
        w.str(u.display_name);
        w.u8(static_cast<std::uint8_t>(u.role));
        w.u32(static_cast<std::uint32_t>(u.groups.size()));
        for (const auto& g : u.groups) w.str(g);
    }
    w.u32(static_cast<std::uint32_t>(s.groups.size()));
    for (const auto& [id, g] : s.groups) {
        w.str(id);
        w.fixed(g.group_public_key);
        put_addresses(w, g.members);
        put_addresses(w, g.experts);
        put_keys(w, g.key_shares);
    }
    w.u32(static_cast<std::uint32_t>(s.files.size()));
    for (const auto& [id, f] : s.files) {
        w.str(id);
        w.fixed(f.uploader);
        w.str(f.group);
        w.u8(static_cast<std::uint8_t>(f.state_flag));
        w.u32(f.version);
        w.u64(f.created_at);
        w.fixed(f.initial_digest);
        w.fixed(f.plaintext_digest);
        w.fixed(f.abstract_digest);
        put_keys(w, f.wrapped_keys);
        put_keys(w, f.abstract_keys);
        w.u32(static_cast<std::uint32_t>(f.endorsements.size()));
        for (const auto& [a, v] : f.endorsements) {
            w.fixed(a);
            w.u8(static_cast<std::uint8_t>(v));
        }
        w.u8(f.thresholds ? 1 : 0);
        if (f.thresholds) {
            w.u32(f.thresholds->expert_quorum);
            w.u32(f.thresholds->ratio_num);
            w.u32(f.thresholds->ratio_den);
        }
        put_addresses(w, f.eligible_experts);
        w.u32(static_cast<std::uint32_t>(f.modification_log.size()));
        for (const auto& m : f.modification_log) {
            w.fixed(m.modifier);
            w.u64(m.time);
            w.str(m.article_id);
            w.fixed(m.new_digest);
            w.fixed(m.new_abstract_digest);
        }
        w.u32(static_cast<std::uint32_t>(f.summaries.size()));
        for (const auto& r : f.summaries) {
            w.u32(r.version);
            w.fixed(r.summary_digest);
            w.str(r.generator_id);
            w.u32(static_cast<std::uint32_t>(r.validator_ids.size()));
            for (const auto& v : r.validator_ids) w.str(v);
            w.u64(r.time);
        }
        w.u32(static_cast<std::uint32_t>(f.interactions.size()));
        for (const auto& e : f.interactions) {
            w.str(e.comment_id);
            w.fixed(e.author);
            w.u8(static_cast<std::uint8_t>(e.kind));
            w.fixed(e.body_digest);
            w.u32(e.version);
            w.u64(e.time);
        }
    }
}

}  // namespace peerchain::contract
