#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "peerchain/contract/contract.hpp"
#include "peerchain/crypto/crypto.hpp"
#include "peerchain/filestore/filestore.hpp"
#include "peerchain/ledger/ledger.hpp"
#include "peerchain/summary/consensus.hpp"

namespace peerchain::engine {

using contract::AccessLevel;
using contract::ArticleId;
using contract::GroupId;
using contract::InteractionKind;
using contract::Role;
using contract::StateFlag;
using contract::ThresholdConfig;
using contract::Verdict;
using crypto::Address;
using crypto::Digest;
using crypto::PublicKey;

struct Credentials {
    std::string name;
    Role role = Role::scholar;
    Address address;
    crypto::KeyPair key_pair;
    bool granted = false;
};

/// The party behind a call. A local actor holds its key pair: it signs its
/// own transactions and opens article keys itself. A remote actor is known by
/// address only; writes need a delegation the operator relays, and key
/// material is opened by the node after the policy check.
struct Actor {
    Address address;
    const crypto::KeyPair* keys = nullptr;
    std::optional<ledger::Delegation> delegation;

    static Actor local(const Credentials& c) { return {c.address, &c.key_pair, std::nullopt}; }
    static Actor remote(const Address& a, std::optional<ledger::Delegation> d = std::nullopt) {
        return {a, nullptr, std::move(d)};
    }
};

struct NodeOptions {
    /// Makes every key, nonce and summary draw reproducible. Only honored by
    /// `init`; a reopened node always uses OS randomness so nonces never repeat.
    std::optional<std::uint64_t> seed;
    ledger::GenesisConfig genesis;
    std::uint32_t max_attempts = summary::kDefaultMaxAttempts;
    summary::VerifierConfig verifier;
    std::uint64_t summary_seed = 0;
};

struct ArticleView {
    AccessLevel level = AccessLevel::denied;
    ArticleId article_id;
    GroupId group;
    Address uploader;
    StateFlag state_flag = StateFlag::not_in_review;
    std::uint32_t version = 0;
    Digest abstract_digest;
    std::optional<std::string> abstract_text;
    // review and full
    std::optional<Digest> plaintext_digest;
    std::optional<ThresholdConfig> thresholds;
    std::size_t favorable = 0;
    std::size_t verdicts = 0;
    std::size_t eligible = 0;
    bool may_endorse = false;
    // full only
    std::optional<std::string> plaintext;
    std::vector<contract::ModificationEntry> modification_log;
};

struct CommentView {
    std::string comment_id;
    Address author;
    InteractionKind kind = InteractionKind::comment;
    std::uint32_t article_version = 0;
    std::string body;
    std::uint64_t time = 0;
};

/// One node: ledger, encrypted file store, summarizer pool and the group keys
/// it holds in custody. Directory layout:
///   node.json        options the node was created with
///   operator.key     operator private key, hex
///   chain.journal    sealed blocks
///   groups.tsv       group private keys sealed to the operator key
///   files/           file store root
class Engine {
public:
    /// Throws already_exists when `dir` already holds a node.
    static std::unique_ptr<Engine> init(const std::filesystem::path& dir, const NodeOptions& options = {});
    /// Loads and verifies an existing node. Throws corrupt_data or io_error.
    static std::unique_ptr<Engine> open(const std::filesystem::path& dir);

    ~Engine();

    ledger::Ledger& ledger() { return *ledger_; }
    const ledger::Ledger& ledger() const { return *ledger_; }
    const filestore::FileStore& files() const { return files_; }
    filestore::FileStore& files() { return files_; }
    const summary::ModelPool& pool() const { return pool_; }
    Address operator_address() const { return ledger_->operator_address(); }
    const std::filesystem::path& dir() const { return dir_; }

    /// Key pair (fresh, or derived from `seed`), registration, grant and the
    /// requested group memberships. Experts join as group experts.
    Credentials register_user(const std::string& name, Role role, const std::vector<GroupId>& groups = {},
                              std::optional<std::uint64_t> seed = std::nullopt);
    /// Same pipeline for a key generated elsewhere.
    Address register_public_key(const PublicKey& pub, Role role, const std::string& name,
                                const std::vector<GroupId>& groups = {});

    PublicKey create_group(const GroupId& id);
    /// Seals the group private key to the member and records the membership.
    void add_member(const GroupId& group, const Address& member, bool expert);
    void remove_member(const GroupId& group, const Address& member);

    /// Summary consensus, then staged article and abstract blobs, then one
    /// atomic block holding upload_file and record_summary, then the blobs are
    /// committed. Any failure leaves neither chain records nor blobs.
    ArticleId submit_article(const Actor& actor, const std::string& plaintext, const GroupId& group,
                             std::optional<ArticleId> id = std::nullopt);

    StateFlag run_review(const Actor& actor, const ArticleId& id, const ThresholdConfig& thresholds);
    StateFlag cast_endorsement(const Actor& actor, const ArticleId& id, Verdict verdict);

    /// Full text when the policy allows it, otherwise the abstract. Throws
    /// unauthorized outside the group and tamper_alarm when stored data does
    /// not match the chain.
    ArticleView read_article(const Actor& actor, const ArticleId& id) const;
    /// Plaintext of an earlier version, checked against that version's digest.
    std::string read_version(const Actor& actor, const ArticleId& id, std::uint32_t version) const;

    /// Same atomicity as submit. Returns the new version number.
    std::uint32_t modify_article(const Actor& actor, const ArticleId& id, const std::string& new_plaintext);

    std::string post_comment(const Actor& actor, const ArticleId& id, InteractionKind kind, const std::string& body,
                             std::optional<std::string> comment_id = std::nullopt);
    std::vector<CommentView> list_comments(const Actor& actor, const ArticleId& id) const;

    std::vector<ArticleId> visible_articles(const Address& caller) const;

private:
    Engine(std::filesystem::path dir, std::unique_ptr<ledger::Ledger> ledger, crypto::KeyPair op,
           summary::ModelPool pool, std::uint32_t max_attempts, std::unique_ptr<crypto::RandomSource> rng);

    ledger::Request request_for(const Actor& actor, contract::Payload payload) const;
    void submit_atomic(const std::vector<ledger::Request>& requests, const std::string& context);
    crypto::SymmetricKey open_key(const Actor& actor, const contract::FileEntry& file, const contract::KeyMap& keys,
                                  const GroupId& group) const;
    std::string decrypt_blob(const ArticleId& id, std::uint32_t version, filestore::BlobKind kind,
                             const crypto::SymmetricKey& key, const Digest& expected) const;
    crypto::KeyPair group_keys(const GroupId& id) const;
    std::mutex& article_mutex(const ArticleId& id);
    void save_custody() const;

    std::filesystem::path dir_;
    std::unique_ptr<ledger::Ledger> ledger_;
    crypto::KeyPair operator_;
    filestore::FileStore files_;
    summary::ModelPool pool_;
    std::uint32_t max_attempts_;
    std::unique_ptr<crypto::RandomSource> rng_;

    mutable std::mutex custody_mu_;
    std::map<GroupId, crypto::KeyPair> group_keys_;
    std::mutex articles_mu_;
    std::map<ArticleId, std::unique_ptr<std::mutex>> article_mu_;
};

/// Key pair derived from (seed, label); used for reproducible identities.
crypto::KeyPair derived_keypair(std::uint64_t seed, std::string_view label);

}  // namespace peerchain::engine
