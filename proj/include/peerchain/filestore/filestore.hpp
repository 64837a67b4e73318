#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "peerchain/contract/types.hpp"
#include "peerchain/crypto/types.hpp"
#include "peerchain/error.hpp"
#include "peerchain/parallel/kernels.hpp"

namespace peerchain::filestore {

using contract::ArticleId;
using contract::InteractionKind;
using crypto::Address;
using crypto::Digest;
using crypto::Nonce;
using crypto::SymmetricKey;

enum class BlobKind : std::uint8_t { article = 0, abstract = 1 };

std::string_view blob_kind_name(BlobKind k);

struct CiphertextBlob {
    ArticleId article_id;
    std::uint32_t version = 1;
    BlobKind kind = BlobKind::article;
    Nonce nonce;
    /// SM4-GCM output, tag included.
    Bytes ciphertext;
    std::int64_t stored_at_ms = 0;
};

/// Associated data bound into every blob's authentication tag.
Bytes blob_aad(const ArticleId& id, std::uint32_t version, BlobKind kind);

/// One line of manifest.tsv.
struct ManifestEntry {
    std::uint32_t version = 0;
    BlobKind kind = BlobKind::article;
    Nonce nonce;
    std::uint64_t length = 0;
    Digest ciphertext_digest;
    std::int64_t stored_at_ms = 0;
};

struct CommentRecord {
    std::string comment_id;
    ArticleId article_id;
    Address author;
    InteractionKind kind = InteractionKind::comment;
    /// Article version the comment was written against.
    std::uint32_t article_version = 1;
    Nonce nonce;
    Bytes body_ciphertext;
    /// SM3 of the plaintext body, as recorded on chain.
    Digest chain_digest;
    std::int64_t stored_at_ms = 0;
};

Bytes comment_aad(const CommentRecord& r);

enum class Integrity { intact, decrypt_failure, digest_mismatch };

std::string_view integrity_name(Integrity i);

/// Decrypts `ciphertext` and compares the plaintext digest with `expected`.
Integrity check_ciphertext(ByteView ciphertext, const Nonce& nonce, ByteView aad, const SymmetricKey& key,
                           const Digest& expected);

struct SweepResult {
    std::size_t positions = 0;
    std::size_t detected = 0;
    std::size_t decrypt_failures = 0;
    std::size_t digest_mismatches = 0;
    std::size_t misses() const { return positions - detected; }
};

/// Flips each byte of the blob's ciphertext in turn (xor `mask`) and counts
/// how many of the altered blobs fail integrity checking.
SweepResult tamper_sweep(const CiphertextBlob& blob, const SymmetricKey& key, const Digest& expected,
                         std::uint8_t mask = 0xff, parallel::Exec exec = parallel::Exec::parallel);

/// Write that is visible only after `commit`. Destroying an uncommitted
/// write discards it.
class StagedWrite {
public:
    StagedWrite() = default;
    StagedWrite(std::function<void()> commit, std::function<void()> discard);
    StagedWrite(StagedWrite&&) noexcept;
    StagedWrite& operator=(StagedWrite&&) noexcept;
    StagedWrite(const StagedWrite&) = delete;
    StagedWrite& operator=(const StagedWrite&) = delete;
    ~StagedWrite();

    void commit();
    void discard();

private:
    std::function<void()> commit_;
    std::function<void()> discard_;
    bool pending_ = false;
};

/// Directory layout under `root`:
///   <article>/v<N>.blob          article ciphertext of version N
///   <article>/v<N>.abstract.blob abstract ciphertext of version N
///   <article>/manifest.tsv       one line per stored blob
///   <article>/comments.log       length-prefixed comment records, append-only
/// Writes to one article are serialized; reads are unrestricted.
class FileStore {
public:
    explicit FileStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    /// Throws already_exists for a stored (article, version, kind).
    StagedWrite stage_blob(CiphertextBlob blob);
    void put_blob(CiphertextBlob blob);
    /// Throws not_found.
    CiphertextBlob get_blob(const ArticleId& id, std::uint32_t version, BlobKind kind = BlobKind::article) const;
    bool has_blob(const ArticleId& id, std::uint32_t version, BlobKind kind = BlobKind::article) const;
    std::optional<std::uint32_t> latest_version(const ArticleId& id) const;
    std::vector<ManifestEntry> manifest(const ArticleId& id) const;
    std::vector<ArticleId> articles() const;

    /// Throws not_found when the article has no blobs, already_exists for a
    /// repeated comment id.
    StagedWrite stage_comment(CommentRecord record);
    void put_comment(CommentRecord record);
    std::vector<CommentRecord> list_comments(const ArticleId& id) const;

    /// Throws not_found when the blob is missing.
    Integrity verify_integrity(const ArticleId& id, std::uint32_t version, const SymmetricKey& key,
                               const Digest& expected, BlobKind kind = BlobKind::article) const;

    /// Recomputes each blob's ciphertext digest against the manifest.
    /// Returns the (version, kind) pairs that disagree or are missing.
    std::vector<std::pair<std::uint32_t, BlobKind>> audit_manifest(const ArticleId& id) const;

private:
    std::filesystem::path article_dir(const ArticleId& id) const;
    std::mutex& article_mutex(const ArticleId& id);

    std::filesystem::path root_;
    std::mutex registry_mu_;
    std::map<ArticleId, std::unique_ptr<std::mutex>> article_mu_;
};

}  // namespace peerchain::filestore
