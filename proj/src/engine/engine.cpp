#include "peerchain/engine/engine.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace peerchain::engine {

namespace fs = std::filesystem;
using contract::KeyMap;
using filestore::BlobKind;
using filestore::CiphertextBlob;

namespace {

constexpr const char* kNodeFormat = "peerchain-node/1";

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read node file", p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write to a sibling and rename, so readers never see a partial file.
void write_file(const fs::path& p, const std::string& content) {
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw Error(ErrorCode::io_error, "cannot write node file", tmp.string());
    }
    fs::rename(tmp, p);
}

std::string context(const Actor& actor, std::string_view what, std::string_view article = {}) {
    std::string s = std::string(what) + " by " + actor.address.hex();
    if (!article.empty()) s += " on " + std::string(article);
    return s;
}

std::string short_id(std::string_view prefix, const Digest& d) { return std::string(prefix) + d.hex().substr(0, 16); }

}  // namespace

crypto::KeyPair derived_keypair(std::uint64_t seed, std::string_view label) {
    Writer w;
    w.str("peerchain/identity");
    w.u64(seed);
    w.str(label);
    return crypto::generate_keypair(crypto::sm3_digest(ByteView(w.data())).view());
}

Engine::Engine(fs::path dir, std::unique_ptr<ledger::Ledger> ledger, crypto::KeyPair op, summary::ModelPool pool,
               std::uint32_t max_attempts, std::unique_ptr<crypto::RandomSource> rng)
    : dir_(std::move(dir)),
      ledger_(std::move(ledger)),
      operator_(op),
      files_(dir_ / "files"),
      pool_(std::move(pool)),
      max_attempts_(max_attempts),
      rng_(std::move(rng)) {}

Engine::~Engine() = default;

std::unique_ptr<Engine> Engine::init(const fs::path& dir, const NodeOptions& options) {
    if (fs::exists(dir / "node.json")) throw Error(ErrorCode::already_exists, "node already initialized", dir.string());
    if (options.max_attempts == 0) throw Error(ErrorCode::invalid_argument, "max_attempts must be at least 1");
    fs::create_directories(dir);
    const auto op = options.seed ? derived_keypair(*options.seed, "operator") : crypto::generate_keypair();
    std::unique_ptr<crypto::RandomSource> rng;
    if (options.seed) {
        rng = std::make_unique<crypto::SeededRandom>(*options.seed);
    } else {
        rng = std::make_unique<crypto::OsRandom>();
    }
    auto ledger = ledger::Ledger::create(op, options.genesis, dir / "chain.journal");

    nlohmann::json node;
    node["format"] = kNodeFormat;
    node["max_attempts"] = options.max_attempts;
    node["summary_seed"] = options.summary_seed;
    node["verifier"] = {{"top_n", options.verifier.top_n},
                        {"tau", options.verifier.tau},
                        {"min_fraction", options.verifier.min_fraction},
                        {"max_fraction", options.verifier.max_fraction}};
    write_file(dir / "operator.key", op.private_key.hex() + "\n");
    fs::permissions(dir / "operator.key", fs::perms::owner_read | fs::perms::owner_write);
    write_file(dir / "node.json", node.dump(2) + "\n");

    auto engine = std::unique_ptr<Engine>(new Engine(dir, std::move(ledger), op,
                                                     summary::default_pool(options.summary_seed, options.verifier),
                                                     options.max_attempts, std::move(rng)));
    engine->save_custody();
    return engine;
}

std::unique_ptr<Engine> Engine::open(const fs::path& dir) {
    nlohmann::json node;
    try {
        node = nlohmann::json::parse(read_file(dir / "node.json"));
        if (node.at("format") != kNodeFormat) throw Error(ErrorCode::corrupt_data, "unknown node format");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_data, "malformed node.json", e.what());
    }
    summary::VerifierConfig verifier;
    std::uint32_t max_attempts = 0;
    std::uint64_t summary_seed = 0;
    try {
        const auto& v = node.at("verifier");
        verifier.top_n = v.at("top_n").get<std::size_t>();
        verifier.tau = v.at("tau").get<double>();
        verifier.min_fraction = v.at("min_fraction").get<double>();
        verifier.max_fraction = v.at("max_fraction").get<double>();
        max_attempts = node.at("max_attempts").get<std::uint32_t>();
        summary_seed = node.at("summary_seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_data, "malformed node.json", e.what());
    }

    auto key_hex = read_file(dir / "operator.key");
    while (!key_hex.empty() && std::isspace(static_cast<unsigned char>(key_hex.back()))) key_hex.pop_back();
    crypto::KeyPair op;
    op.private_key = crypto::PrivateKey::from_hex(key_hex);
    op.public_key = crypto::sm2::derive_public(op.private_key);

    auto ledger = ledger::Ledger::open(dir / "chain.journal", op);
    auto engine = std::unique_ptr<Engine>(new Engine(dir, std::move(ledger), op,
                                                     summary::default_pool(summary_seed, verifier), max_attempts,
                                                     std::make_unique<crypto::OsRandom>()));

    const auto state = engine->ledger_->snapshot();
    std::istringstream custody(read_file(dir / "groups.tsv"));
    std::string line;
    while (std::getline(custody, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw Error(ErrorCode::corrupt_data, "malformed groups.tsv line", line);
        const std::string id = line.substr(0, tab);
        crypto::KeyPair gk;
        gk.private_key = crypto::PrivateKey::from(crypto::open_secret(op.private_key, from_hex(line.substr(tab + 1))));
        gk.public_key = crypto::sm2::derive_public(gk.private_key);
        auto it = state->contract.groups.find(id);
        if (it == state->contract.groups.end() || it->second.group_public_key != gk.public_key) {
            throw Error(ErrorCode::corrupt_data, "group key in custody does not match the chain", id);
        }
        engine->group_keys_[id] = gk;
    }
    if (engine->group_keys_.size() != state->contract.groups.size()) {
        throw Error(ErrorCode::corrupt_data, "groups.tsv is missing group keys");
    }
    return engine;
}

void Engine::save_custody() const {
    std::string out = "# group\tprivate key sealed to the operator\n";
    for (const auto& [id, kp] : group_keys_) {
        out += id + "\t" + to_hex(crypto::seal_secret(operator_.public_key, kp.private_key.view(), *rng_)) + "\n";
    }
    write_file(dir_ / "groups.tsv", out);
}

crypto::KeyPair Engine::group_keys(const GroupId& id) const {
    std::lock_guard lock(custody_mu_);
    auto it = group_keys_.find(id);
    if (it == group_keys_.end()) throw Error(ErrorCode::not_found, "unknown group", id);
    return it->second;
}

std::mutex& Engine::article_mutex(const ArticleId& id) {
    std::lock_guard lock(articles_mu_);
    auto& slot = article_mu_[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

ledger::Request Engine::request_for(const Actor& actor, contract::Payload payload) const {
    if (actor.keys) {
        if (crypto::derive_address(actor.keys->public_key) != actor.address) {
            throw Error(ErrorCode::invalid_argument, "actor keys do not match its address");
        }
        return {actor.keys, std::move(payload), std::nullopt};
    }
    if (!actor.delegation) throw Error(ErrorCode::unauthorized, "remote caller without a signed request");
    if (actor.delegation->principal != actor.address) {
        throw Error(ErrorCode::invalid_argument, "delegation principal does not match the caller");
    }
    return {&operator_, std::move(payload), actor.delegation};
}

void Engine::submit_atomic(const std::vector<ledger::Request>& requests, const std::string& ctx) {
    try {
        ledger_->submit_all(requests, true);
    } catch (const Error& e) {
        throw Error(e.code(), e.what(), e.detail().empty() ? ctx : ctx + "; " + e.detail());
    }
}

Credentials Engine::register_user(const std::string& name, Role role, const std::vector<GroupId>& groups,
                                  std::optional<std::uint64_t> seed) {
    Credentials c;
    c.name = name;
    c.role = role;
    c.key_pair = seed ? derived_keypair(*seed, name) : crypto::generate_keypair(*rng_);
    c.address = register_public_key(c.key_pair.public_key, role, name, groups);
    c.granted = true;
    return c;
}

Address Engine::register_public_key(const PublicKey& pub, Role role, const std::string& name,
                                    const std::vector<GroupId>& groups) {
    {
        const auto state = ledger_->snapshot();
        for (const auto& g : groups) {
            if (!state->contract.groups.contains(g)) throw Error(ErrorCode::not_found, "unknown group", g);
        }
    }
    const Address addr = ledger_->register_account(pub, role, name);
    const auto receipt = ledger_->grant_ether(addr);
    if (!receipt.ok) throw Error(receipt.code, receipt.message, "grant to " + addr.hex());
    for (const auto& g : groups) add_member(g, addr, role == Role::expert);
    return addr;
}

PublicKey Engine::create_group(const GroupId& id) {
    std::lock_guard lock(custody_mu_);
    if (group_keys_.contains(id)) throw Error(ErrorCode::already_exists, "group already exists", id);
    const auto kp = crypto::generate_keypair(*rng_);
    submit_atomic({{&operator_, contract::CreateGroup{id, kp.public_key}, std::nullopt}}, "create_group " + id);
    group_keys_[id] = kp;
    save_custody();
    return kp.public_key;
}

void Engine::add_member(const GroupId& group, const Address& member, bool expert) {
    const auto gk = group_keys(group);
    const auto account = ledger_->read_account(member);
    Bytes share = crypto::seal_secret(account.public_key, gk.private_key.view(), *rng_);
    submit_atomic({{&operator_, contract::AddMember{group, member, expert, std::move(share)}, std::nullopt}},
                  "add_member " + member.hex() + " to " + group);
}

void Engine::remove_member(const GroupId& group, const Address& member) {
    submit_atomic({{&operator_, contract::RemoveMember{group, member}, std::nullopt}},
                  "remove_member " + member.hex() + " from " + group);
}

namespace {

CiphertextBlob seal_blob(const ArticleId& id, std::uint32_t version, BlobKind kind, const crypto::SymmetricKey& key,
                         std::string_view text, crypto::RandomSource& rng) {
    CiphertextBlob b;
    b.article_id = id;
    b.version = version;
    b.kind = kind;
    b.nonce = crypto::generate_nonce(rng);
    b.ciphertext = crypto::sym_encrypt(key, as_bytes(text), b.nonce, filestore::blob_aad(id, version, kind));
    return b;
}

KeyMap wrap_for(const crypto::SymmetricKey& key, const PublicKey& uploader, const PublicKey& group,
                crypto::RandomSource& rng) {
    KeyMap m;
    for (const auto& pub : {uploader, group}) m[crypto::derive_address(pub)] = crypto::wrap_key(pub, key, rng).ciphertext;
    return m;
}

contract::RecordSummary summary_record(const ArticleId& id, const summary::TrustworthySummary& s) {
    return {id, s.digest, s.provenance.generator_id,
            {s.provenance.validator_ids[0], s.provenance.validator_ids[1]}};
}

}  // namespace

ArticleId Engine::submit_article(const Actor& actor, const std::string& plaintext, const GroupId& group,
                                 std::optional<ArticleId> id) {
    if (plaintext.empty()) throw Error(ErrorCode::invalid_argument, "empty article");
    const auto ctx = context(actor, "submit_article");
    PublicKey group_pub;
    {
        const auto state = ledger_->snapshot();
        const auto& c = state->contract;
        if (!c.users.contains(actor.address)) throw Error(ErrorCode::unknown_identity, "caller is not registered", ctx);
        auto git = c.groups.find(group);
        if (git == c.groups.end()) throw Error(ErrorCode::not_found, "unknown group", group);
        if (!git->second.members.contains(actor.address)) {
            throw Error(ErrorCode::unauthorized, "caller is not a member of the group", ctx);
        }
        group_pub = git->second.group_public_key;
        if (!id) {
            Writer w;
            w.fixed(actor.address);
            w.str(plaintext);
            w.u64(rng_->next_u64());
            id = short_id("art-", crypto::sm3_digest(ByteView(w.data())));
        }
        if (c.files.contains(*id)) throw Error(ErrorCode::already_exists, "article id in use", *id);
    }
    std::lock_guard lock(article_mutex(*id));

    const auto abstract = summary::consensus_summarize(pool_, plaintext, max_attempts_);
    const PublicKey uploader_pub = ledger_->read_account(actor.address).public_key;
    const auto article_key = crypto::generate_symmetric_key(*rng_);
    const auto abstract_key = crypto::generate_symmetric_key(*rng_);

    auto staged_article = files_.stage_blob(seal_blob(*id, 1, BlobKind::article, article_key, plaintext, *rng_));
    auto staged_abstract =
        files_.stage_blob(seal_blob(*id, 1, BlobKind::abstract, abstract_key, abstract.summary, *rng_));

    contract::UploadFile upload{*id,
                                crypto::sm3_digest(plaintext),
                                abstract.digest,
                                group,
                                wrap_for(article_key, uploader_pub, group_pub, *rng_),
                                wrap_for(abstract_key, uploader_pub, group_pub, *rng_)};
    submit_atomic({request_for(actor, std::move(upload)), {&operator_, summary_record(*id, abstract), std::nullopt}},
                  context(actor, "submit_article", *id));
    staged_article.commit();
    staged_abstract.commit();
    return *id;
}

StateFlag Engine::run_review(const Actor& actor, const ArticleId& id, const ThresholdConfig& thresholds) {
    submit_atomic({request_for(actor, contract::StartReview{id, thresholds})}, context(actor, "start_review", id));
    return ledger_->snapshot()->contract.files.at(id).state_flag;
}

StateFlag Engine::cast_endorsement(const Actor& actor, const ArticleId& id, Verdict verdict) {
    submit_atomic({request_for(actor, contract::Endorse{id, verdict})}, context(actor, "endorse", id));
    return ledger_->snapshot()->contract.files.at(id).state_flag;
}

crypto::SymmetricKey Engine::open_key(const Actor& actor, const contract::FileEntry& file, const KeyMap& keys,
                                      const GroupId& group) const {
    if (actor.keys) {
        // what the caller can open with its own private key
        const auto state = ledger_->snapshot();
        if (auto own = keys.find(actor.address); own != keys.end()) {
            return crypto::unwrap_key(actor.keys->private_key, {own->second, actor.address});
        }
        const auto& g = state->contract.groups.at(group);
        auto share = g.key_shares.find(actor.address);
        auto wrapped = keys.find(g.group_address);
        if (share == g.key_shares.end() || wrapped == keys.end()) {
            throw Error(ErrorCode::unauthorized, "no key reachable by caller", file.article_id);
        }
        const auto group_priv = crypto::PrivateKey::from(crypto::open_secret(actor.keys->private_key, share->second));
        return crypto::unwrap_key(group_priv, {wrapped->second, g.group_address});
    }
    const auto gk = group_keys(group);
    const Address group_addr = crypto::derive_address(gk.public_key);
    auto wrapped = keys.find(group_addr);
    if (wrapped == keys.end()) throw Error(ErrorCode::tamper_alarm, "article key not wrapped for its group", file.article_id);
    return crypto::unwrap_key(gk.private_key, {wrapped->second, group_addr});
}

std::string Engine::decrypt_blob(const ArticleId& id, std::uint32_t version, BlobKind kind,
                                 const crypto::SymmetricKey& key, const Digest& expected) const {
    const std::string where =
        id + " v" + std::to_string(version) + " " + std::string(filestore::blob_kind_name(kind));
    CiphertextBlob blob;
    try {
        blob = files_.get_blob(id, version, kind);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::not_found) throw Error(ErrorCode::tamper_alarm, "blob recorded on chain is missing", where);
        throw;
    }
    Bytes plain;
    try {
        plain = crypto::sym_decrypt(key, blob.ciphertext, blob.nonce, filestore::blob_aad(id, version, kind));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::decrypt_failure) throw Error(ErrorCode::tamper_alarm, "blob fails authentication", where);
        throw;
    }
    if (crypto::sm3_digest(ByteView(plain)) != expected) {
        throw Error(ErrorCode::tamper_alarm, "blob digest differs from the chain", where);
    }
    return to_string(plain);
}

ArticleView Engine::read_article(const Actor& actor, const ArticleId& id) const {
    const auto state = ledger_->snapshot();
    const auto fv = contract::get_file(state->contract, actor.address, id);
    if (fv.level == AccessLevel::denied) throw Error(ErrorCode::unauthorized, "access denied", context(actor, "read", id));
    const auto& file = state->contract.files.at(id);

    ArticleView v;
    v.level = fv.level;
    v.article_id = fv.article_id;
    v.group = fv.group;
    v.uploader = fv.uploader;
    v.state_flag = fv.state_flag;
    v.version = fv.version;
    v.abstract_digest = fv.abstract_digest;
    v.plaintext_digest = fv.plaintext_digest;
    v.thresholds = fv.thresholds;
    v.favorable = fv.favorable;
    v.verdicts = fv.verdicts;
    v.eligible = fv.eligible;
    v.may_endorse = fv.caller_may_endorse;
    v.modification_log = fv.modification_log;

    const auto abstract_key = open_key(actor, file, file.abstract_keys, file.group);
    v.abstract_text = decrypt_blob(id, fv.version, BlobKind::abstract, abstract_key, fv.abstract_digest);
    if (fv.level == AccessLevel::full) {
        const auto key = open_key(actor, file, file.wrapped_keys, file.group);
        v.plaintext = decrypt_blob(id, fv.version, BlobKind::article, key, file.plaintext_digest);
    }
    return v;
}

std::string Engine::read_version(const Actor& actor, const ArticleId& id, std::uint32_t version) const {
    const auto state = ledger_->snapshot();
    const auto fv = contract::get_file(state->contract, actor.address, id);
    if (fv.level != AccessLevel::full) {
        throw Error(ErrorCode::unauthorized, "caller has no full-text access", context(actor, "read_version", id));
    }
    const auto& file = state->contract.files.at(id);
    const auto digest = file.digest_for_version(version);
    if (!digest) throw Error(ErrorCode::not_found, "no such version", id + " v" + std::to_string(version));
    const auto key = open_key(actor, file, file.wrapped_keys, file.group);
    return decrypt_blob(id, version, BlobKind::article, key, *digest);
}

std::uint32_t Engine::modify_article(const Actor& actor, const ArticleId& id, const std::string& new_plaintext) {
    if (new_plaintext.empty()) throw Error(ErrorCode::invalid_argument, "empty article");
    std::lock_guard lock(article_mutex(id));
    const auto state = ledger_->snapshot();
    const auto fv = contract::get_file(state->contract, actor.address, id);
    if (fv.level != AccessLevel::full) {
        throw Error(ErrorCode::unauthorized, "caller has no full-text access", context(actor, "modify", id));
    }
    const auto& file = state->contract.files.at(id);
    const auto article_key = open_key(actor, file, file.wrapped_keys, file.group);
    const auto abstract_key = open_key(actor, file, file.abstract_keys, file.group);

    const auto abstract = summary::consensus_summarize(pool_, new_plaintext, max_attempts_);
    const std::uint32_t version = file.version + 1;
    auto staged_article = files_.stage_blob(seal_blob(id, version, BlobKind::article, article_key, new_plaintext, *rng_));
    auto staged_abstract =
        files_.stage_blob(seal_blob(id, version, BlobKind::abstract, abstract_key, abstract.summary, *rng_));

    contract::UpdateFile update{id, crypto::sm3_digest(new_plaintext), abstract.digest, file.wrapped_keys,
                                file.abstract_keys};
    submit_atomic({request_for(actor, std::move(update)), {&operator_, summary_record(id, abstract), std::nullopt}},
                  context(actor, "modify", id));
    staged_article.commit();
    staged_abstract.commit();
    return version;
}

std::string Engine::post_comment(const Actor& actor, const ArticleId& id, InteractionKind kind, const std::string& body,
                                 std::optional<std::string> comment_id) {
    if (body.empty()) throw Error(ErrorCode::invalid_argument, "empty comment");
    std::lock_guard lock(article_mutex(id));
    const auto state = ledger_->snapshot();
    const auto fv = contract::get_file(state->contract, actor.address, id);
    if (fv.level != AccessLevel::full) {
        throw Error(ErrorCode::unauthorized, "caller has no full-text access", context(actor, "comment", id));
    }
    const auto& file = state->contract.files.at(id);
    const auto key = open_key(actor, file, file.wrapped_keys, file.group);
    if (!comment_id) {
        Writer w;
        w.fixed(actor.address);
        w.str(id);
        w.str(body);
        w.u64(rng_->next_u64());
        comment_id = short_id("c-", crypto::sm3_digest(ByteView(w.data())));
    }

    filestore::CommentRecord rec;
    rec.comment_id = *comment_id;
    rec.article_id = id;
    rec.author = actor.address;
    rec.kind = kind;
    rec.article_version = file.version;
    rec.nonce = crypto::generate_nonce(*rng_);
    rec.chain_digest = crypto::sm3_digest(body);
    rec.body_ciphertext = crypto::sym_encrypt(key, as_bytes(body), rec.nonce, filestore::comment_aad(rec));
    auto staged = files_.stage_comment(rec);
    submit_atomic({request_for(actor, contract::LogInteraction{id, *comment_id, kind, rec.chain_digest})},
                  context(actor, "comment", id));
    staged.commit();
    return *comment_id;
}

std::vector<CommentView> Engine::list_comments(const Actor& actor, const ArticleId& id) const {
    const auto state = ledger_->snapshot();
    const auto fv = contract::get_file(state->contract, actor.address, id);
    if (fv.level != AccessLevel::full) {
        throw Error(ErrorCode::unauthorized, "caller has no full-text access", context(actor, "list_comments", id));
    }
    const auto& file = state->contract.files.at(id);
    const auto key = open_key(actor, file, file.wrapped_keys, file.group);
    std::map<std::string, const contract::InteractionEntry*> on_chain;
    for (const auto& e : file.interactions) on_chain[e.comment_id] = &e;

    std::vector<CommentView> out;
    for (const auto& rec : files_.list_comments(id)) {
        auto it = on_chain.find(rec.comment_id);
        if (it == on_chain.end()) throw Error(ErrorCode::tamper_alarm, "stored comment has no chain record", rec.comment_id);
        const auto& entry = *it->second;
        Bytes plain;
        try {
            plain = crypto::sym_decrypt(key, rec.body_ciphertext, rec.nonce, filestore::comment_aad(rec));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::decrypt_failure) throw Error(ErrorCode::tamper_alarm, "comment fails authentication", rec.comment_id);
            throw;
        }
        if (crypto::sm3_digest(ByteView(plain)) != entry.body_digest || entry.author != rec.author ||
            entry.kind != rec.kind) {
            throw Error(ErrorCode::tamper_alarm, "comment differs from its chain record", rec.comment_id);
        }
        out.push_back({rec.comment_id, rec.author, rec.kind, entry.version, to_string(plain), entry.time});
        on_chain.erase(it);
    }
    if (!on_chain.empty()) {
        throw Error(ErrorCode::tamper_alarm, "comment recorded on chain is missing from storage", on_chain.begin()->first);
    }
    return out;
}

std::vector<ArticleId> Engine::visible_articles(const Address& caller) const {
    return contract::visible_articles(ledger_->snapshot()->contract, caller);
}

}  // namespace peerchain::engine
