#include "peerchain/filestore/filestore.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>

#include "peerchain/crypto/crypto.hpp"
#include "peerchain/error.hpp"

namespace peerchain::filestore {

namespace fs = std::filesystem;

namespace {

constexpr const char* manifest_name = "manifest.tsv";
constexpr const char* comments_name = "comments.log";
constexpr const char* manifest_header = "# version\tkind\tnonce\tlength\tsm3_ciphertext\tstored_at_ms\n";

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string blob_file_name(std::uint32_t version, BlobKind kind) {
    return "v" + std::to_string(version) + (kind == BlobKind::abstract ? ".abstract.blob" : ".blob");
}

Bytes read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "cannot read", p.string());
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, ByteView data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::io_error, "cannot write", p.string());
}

void append_file(const fs::path& p, ByteView data) {
    std::ofstream out(p, std::ios::binary | std::ios::app);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::io_error, "cannot append", p.string());
}

std::vector<ManifestEntry> read_manifest(const fs::path& dir) {
    std::vector<ManifestEntry> out;
    std::ifstream in(dir / manifest_name);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string version, kind, nonce, length, digest, stored;
        if (!(std::getline(fields, version, '\t') && std::getline(fields, kind, '\t') &&
              std::getline(fields, nonce, '\t') && std::getline(fields, length, '\t') &&
              std::getline(fields, digest, '\t') && std::getline(fields, stored, '\t'))) {
            throw Error(ErrorCode::corrupt_data, "malformed manifest line", line);
        }
        ManifestEntry e;
        try {
            e.version = static_cast<std::uint32_t>(std::stoul(version));
            e.kind = kind == "abstract" ? BlobKind::abstract : BlobKind::article;
            e.nonce = Nonce::from_hex(nonce);
            e.length = std::stoull(length);
            e.ciphertext_digest = Digest::from_hex(digest);
            e.stored_at_ms = std::stoll(stored);
        } catch (const std::exception&) {
            throw Error(ErrorCode::corrupt_data, "malformed manifest line", line);
        }
        out.push_back(e);
    }
    return out;
}

std::string manifest_line(const ManifestEntry& e) {
    std::ostringstream os;
    os << e.version << '\t' << blob_kind_name(e.kind) << '\t' << e.nonce.hex() << '\t' << e.length << '\t'
       << e.ciphertext_digest.hex() << '\t' << e.stored_at_ms << '\n';
    return os.str();
}

Bytes encode_comment(const CommentRecord& r) {
    Writer w;
    w.str(r.comment_id);
    w.str(r.article_id);
    w.fixed(r.author);
    w.u8(static_cast<std::uint8_t>(r.kind));
    w.u32(r.article_version);
    w.fixed(r.nonce);
    w.bytes(r.body_ciphertext);
    w.fixed(r.chain_digest);
    w.u64(static_cast<std::uint64_t>(r.stored_at_ms));
    return std::move(w).take();
}

CommentRecord decode_comment(ByteView in) {
    Reader rd(in);
    CommentRecord r;
    r.comment_id = rd.str();
    r.article_id = rd.str();
    r.author = rd.fixed<Address>();
    const std::uint8_t kind = rd.u8();
    if (kind > 1) throw Error(ErrorCode::corrupt_data, "bad comment kind");
    r.kind = static_cast<InteractionKind>(kind);
    r.article_version = rd.u32();
    r.nonce = rd.fixed<Nonce>();
    r.body_ciphertext = rd.bytes();
    r.chain_digest = rd.fixed<Digest>();
    r.stored_at_ms = static_cast<std::int64_t>(rd.u64());
    rd.expect_done();
    return r;
}

std::vector<CommentRecord> read_comments(const fs::path& dir) {
    std::vector<CommentRecord> out;
    const fs::path p = dir / comments_name;
    if (!fs::exists(p)) return out;
    const Bytes data = read_file(p);
    Reader r(data);
    while (!r.done()) {
        const std::uint32_t len = r.u32();
        out.push_back(decode_comment(r.raw(len)));
    }
    return out;
}

}  // namespace

std::string_view blob_kind_name(BlobKind k) { return k == BlobKind::abstract ? "abstract" : "article"; }

std::string_view integrity_name(Integrity i) {
    switch (i) {
        case Integrity::intact: return "intact";
        case Integrity::decrypt_failure: return "decrypt_failure";
        case Integrity::digest_mismatch: return "digest_mismatch";
    }
    return "unknown";
}

Bytes blob_aad(const ArticleId& id, std::uint32_t version, BlobKind kind) {
    Writer w;
    w.str("peerchain/blob");
    w.str(id);
    w.u32(version);
    w.u8(static_cast<std::uint8_t>(kind));
    return std::move(w).take();
}

Bytes comment_aad(const CommentRecord& r) {
    Writer w;
    w.str("peerchain/comment");
    w.str(r.article_id);
    w.str(r.comment_id);
    w.fixed(r.author);
    w.u8(static_cast<std::uint8_t>(r.kind));
    return std::move(w).take();
}

Integrity check_ciphertext(ByteView ciphertext, const Nonce& nonce, ByteView aad, const SymmetricKey& key,
                           const Digest& expected) {
    Bytes plain;
    try {
        plain = crypto::sym_decrypt(key, ciphertext, nonce, aad);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::decrypt_failure) throw;
        return Integrity::decrypt_failure;
    }
    return crypto::sm3_digest(ByteView(plain)) == expected ? Integrity::intact : Integrity::digest_mismatch;
}

SweepResult tamper_sweep(const CiphertextBlob& blob, const SymmetricKey& key, const Digest& expected,
                         std::uint8_t mask, parallel::Exec exec) {
    const Bytes aad = blob_aad(blob.article_id, blob.version, blob.kind);
    const std::size_t n = blob.ciphertext.size();
    // Two counters packed into one sum: decrypt failures low, mismatches high.
    constexpr std::uint64_t high = std::uint64_t{1} << 32;
    const std::uint64_t packed = parallel::sum_over(
        n,
        [&](std::size_t i) -> std::uint64_t {
            Bytes altered = blob.ciphertext;
            altered[i] ^= mask;
            switch (check_ciphertext(altered, blob.nonce, aad, key, expected)) {
                case Integrity::decrypt_failure: return 1;
                case Integrity::digest_mismatch: return high;
                case Integrity::intact: return 0;
            }
            return 0;
        },
        exec);
    SweepResult r;
    r.positions = n;
    r.decrypt_failures = static_cast<std::size_t>(packed % high);
    r.digest_mismatches = static_cast<std::size_t>(packed / high);
    r.detected = r.decrypt_failures + r.digest_mismatches;
    return r;
}

StagedWrite::StagedWrite(std::function<void()> commit, std::function<void()> discard)
    : commit_(std::move(commit)), discard_(std::move(discard)), pending_(true) {}

StagedWrite::StagedWrite(StagedWrite&& other) noexcept
    : commit_(std::move(other.commit_)), discard_(std::move(other.discard_)), pending_(other.pending_) {
    other.pending_ = false;
}

StagedWrite& StagedWrite::operator=(StagedWrite&& other) noexcept {
    if (this != &other) {
        if (pending_) discard();
        commit_ = std::move(other.commit_);
        discard_ = std::move(other.discard_);
        pending_ = other.pending_;
        other.pending_ = false;
    }
    return *this;
}

StagedWrite::~StagedWrite() {
    if (pending_) {
        try {
            discard();
        } catch (...) {
            // best effort; the staging file is ignored by readers
        }
    }
}

void StagedWrite::commit() {
    if (!pending_) throw Error(ErrorCode::invalid_state, "staged write already finished");
    pending_ = false;
    commit_();
}

void StagedWrite::discard() {
    if (!pending_) return;
    pending_ = false;
    discard_();
}

FileStore::FileStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path FileStore::article_dir(const ArticleId& id) const {
    if (!contract::valid_identifier(id)) throw Error(ErrorCode::invalid_argument, "invalid article id", id);
    return root_ / id;
}

std::mutex& FileStore::article_mutex(const ArticleId& id) {
    std::lock_guard lock(registry_mu_);
    auto& slot = article_mu_[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

StagedWrite FileStore::stage_blob(CiphertextBlob blob) {
    const fs::path dir = article_dir(blob.article_id);
    if (blob.version == 0) throw Error(ErrorCode::invalid_argument, "versions start at 1");
    auto& mu = article_mutex(blob.article_id);
    const std::string name = blob_file_name(blob.version, blob.kind);
    {
        std::lock_guard lock(mu);
        if (fs::exists(dir / name)) {
            throw Error(ErrorCode::already_exists, "blob already stored", blob.article_id + "/" + name);
        }
        fs::create_directories(dir / ".staging");
    }
    static std::atomic<std::uint64_t> counter{0};
    const fs::path tmp = dir / ".staging" / (name + "." + std::to_string(counter++));
    write_file(tmp, blob.ciphertext);

    ManifestEntry entry;
    entry.version = blob.version;
    entry.kind = blob.kind;
    entry.nonce = blob.nonce;
    entry.length = blob.ciphertext.size();
    entry.ciphertext_digest = crypto::sm3_digest(ByteView(blob.ciphertext));
    entry.stored_at_ms = blob.stored_at_ms != 0 ? blob.stored_at_ms : now_ms();

    auto commit = [dir, name, tmp, entry, &mu, id = blob.article_id] {
        std::lock_guard lock(mu);
        if (fs::exists(dir / name)) {
            fs::remove(tmp);
            throw Error(ErrorCode::already_exists, "blob already stored", id + "/" + name);
        }
        fs::rename(tmp, dir / name);
        const fs::path manifest = dir / manifest_name;
        if (!fs::exists(manifest)) append_file(manifest, as_bytes(manifest_header));
        append_file(manifest, as_bytes(manifest_line(entry)));
    };
    auto discard = [tmp] {
        std::error_code ec;
        fs::remove(tmp, ec);
    };
    return StagedWrite(commit, discard);
}

void FileStore::put_blob(CiphertextBlob blob) { stage_blob(std::move(blob)).commit(); }

bool FileStore::has_blob(const ArticleId& id, std::uint32_t version, BlobKind kind) const {
    return fs::exists(article_dir(id) / blob_file_name(version, kind));
}

CiphertextBlob FileStore::get_blob(const ArticleId& id, std::uint32_t version, BlobKind kind) const {
    const fs::path dir = article_dir(id);
    for (const auto& e : read_manifest(dir)) {
        if (e.version != version || e.kind != kind) continue;
        CiphertextBlob b;
        b.article_id = id;
        b.version = version;
        b.kind = kind;
        b.nonce = e.nonce;
        b.ciphertext = read_file(dir / blob_file_name(version, kind));
        b.stored_at_ms = e.stored_at_ms;
        return b;
    }
    throw Error(ErrorCode::not_found, "no such blob", id + "/" + blob_file_name(version, kind));
}

std::optional<std::uint32_t> FileStore::latest_version(const ArticleId& id) const {
    std::optional<std::uint32_t> best;
    for (const auto& e : read_manifest(article_dir(id))) {
        if (e.kind == BlobKind::article && (!best || e.version > *best)) best = e.version;
    }
    return best;
}

std::vector<ManifestEntry> FileStore::manifest(const ArticleId& id) const { return read_manifest(article_dir(id)); }

std::vector<ArticleId> FileStore::articles() const {
    std::vector<ArticleId> out;
    for (const auto& entry : fs::directory_iterator(root_)) {
        if (entry.is_directory() && fs::exists(entry.path() / manifest_name)) {
            out.push_back(entry.path().filename().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

StagedWrite FileStore::stage_comment(CommentRecord record) {
    const fs::path dir = article_dir(record.article_id);
    if (!contract::valid_identifier(record.comment_id)) {
        throw Error(ErrorCode::invalid_argument, "invalid comment id", record.comment_id);
    }
    auto& mu = article_mutex(record.article_id);
    auto check = [dir, record] {
        if (!fs::exists(dir / manifest_name)) throw Error(ErrorCode::not_found, "unknown article", record.article_id);
        for (const auto& c : read_comments(dir)) {
            if (c.comment_id == record.comment_id) {
                throw Error(ErrorCode::already_exists, "comment id already used", record.comment_id);
            }
        }
    };
    {
        std::lock_guard lock(mu);
        check();
    }
    if (record.stored_at_ms == 0) record.stored_at_ms = now_ms();
    auto commit = [dir, record, check, &mu] {
        std::lock_guard lock(mu);
        check();
        const Bytes enc = encode_comment(record);
        Writer w;
        w.u32(static_cast<std::uint32_t>(enc.size()));
        w.raw(enc);
        append_file(dir / comments_name, w.data());
    };
    return StagedWrite(commit, [] {});
}

void FileStore::put_comment(CommentRecord record) { stage_comment(std::move(record)).commit(); }

std::vector<CommentRecord> FileStore::list_comments(const ArticleId& id) const {
    const fs::path dir = article_dir(id);
    if (!fs::exists(dir / manifest_name)) throw Error(ErrorCode::not_found, "unknown article", id);
    return read_comments(dir);
}

Integrity FileStore::verify_integrity(const ArticleId& id, std::uint32_t version, const SymmetricKey& key,
                                      const Digest& expected, BlobKind kind) const {
    const auto blob = get_blob(id, version, kind);
    return check_ciphertext(blob.ciphertext, blob.nonce, blob_aad(id, version, kind), key, expected);
}

std::vector<std::pair<std::uint32_t, BlobKind>> FileStore::audit_manifest(const ArticleId& id) const {
    const fs::path dir = article_dir(id);
    std::vector<std::pair<std::uint32_t, BlobKind>> bad;
    for (const auto& e : read_manifest(dir)) {
        const fs::path p = dir / blob_file_name(e.version, e.kind);
        if (!fs::exists(p)) {
            bad.emplace_back(e.version, e.kind);
            continue;
        }
        const Bytes data = read_file(p);
        if (data.size() != e.length || crypto::sm3_digest(ByteView(data)) != e.ciphertext_digest) {
            bad.emplace_back(e.version, e.kind);
        }
    }
    return bad;
}

}  // namespace peerchain::filestore
