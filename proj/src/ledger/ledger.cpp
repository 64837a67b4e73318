#include "peerchain/ledger/ledger.hpp"

#include <chrono>
#include <fstream>
#include <map>

#include "peerchain/crypto/crypto.hpp"

namespace peerchain::ledger {

namespace {

using KeyIndex = std::map<Address, PublicKey>;

constexpr std::string_view journal_magic = "PCJOURNAL1\n";

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// Public keys become known through genesis and registration payloads only.
KeyIndex collect_keys(std::span<const SealedBlock> blocks) {
    KeyIndex keys;
    for (const auto& b : blocks) {
        for (const auto& tx : b.block.txs) {
            const PublicKey* pub = nullptr;
            if (const auto* g = std::get_if<contract::Genesis>(&tx.payload)) pub = &g->distributor;
            if (const auto* r = std::get_if<contract::RegisterAccount>(&tx.payload)) pub = &r->public_key;
            if (!pub) continue;
            try {
                keys.emplace(crypto::derive_address(*pub), *pub);
            } catch (const Error&) {
                // an invalid key never becomes an account
            }
        }
    }
    return keys;
}

// Hash, linkage and signatures of one block; empty when sound.
std::string check_block(std::span<const SealedBlock> blocks, std::size_t i, const KeyIndex& keys) {
    const auto& sb = blocks[i];
    const Block& b = sb.block;
    if (b.index != i) return "index " + std::to_string(b.index) + " at position " + std::to_string(i);
    const Digest expected_prev = i == 0 ? Digest{} : blocks[i - 1].block.block_hash;
    if (b.prev_hash != expected_prev) return "prev_hash does not link to block " + std::to_string(i - 1);
    if (b.compute_hash() != b.block_hash) return "block hash does not recompute";
    if (sb.receipts.size() != b.txs.size()) return "receipt count differs from transaction count";
    for (std::size_t k = 0; k < b.txs.size(); ++k) {
        const auto& tx = b.txs[k];
        auto it = keys.find(tx.sender);
        if (it == keys.end()) return "transaction " + std::to_string(k) + " from unknown sender";
        if (!crypto::verify(tx.signature.view(), tx.signing_bytes(), it->second)) {
            return "transaction " + std::to_string(k) + " signature does not verify";
        }
        if (tx.delegation) {
            auto pit = keys.find(tx.delegation->principal);
            if (pit == keys.end() || !crypto::verify(tx.delegation->principal_signature.view(),
                                                     tx.delegation->request_digest.view(), pit->second)) {
                return "transaction " + std::to_string(k) + " delegation does not verify";
            }
        }
    }
    return {};
}

Receipt genesis_receipt(const Transaction& tx) {
    Receipt r;
    r.tx_id = tx.id();
    r.payer = tx.sender;
    return r;
}

// Replays without signature checks. On success `out` holds the final state.
VerifyReport replay_into(std::span<const SealedBlock> blocks, WorldState& out) {
    if (blocks.empty()) return VerifyReport::fail(0, "empty chain");
    const auto& g = blocks[0];
    if (g.block.txs.size() != 1) return VerifyReport::fail(0, "genesis must hold exactly one transaction");
    WorldState world;
    try {
        world = apply_genesis(g.block.txs[0], false);
    } catch (const Error& e) {
        return VerifyReport::fail(0, e.what());
    }
    if (g.receipts != std::vector<Receipt>{genesis_receipt(g.block.txs[0])}) {
        return VerifyReport::fail(0, "genesis receipt differs");
    }
    if (world.state_root() != g.block.state_root) return VerifyReport::fail(0, "state root differs on replay");
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        if (b.block.txs.empty()) return VerifyReport::fail(i, "empty block");
        std::vector<Receipt> receipts;
        for (std::size_t k = 0; k < b.block.txs.size(); ++k) {
            try {
                receipts.push_back(apply_transaction(world, b.block.txs[k], i, false));
            } catch (const Error& e) {
                return VerifyReport::fail(i, "transaction " + std::to_string(k) + " rejected on replay: " + e.what());
            }
        }
        if (receipts != b.receipts) return VerifyReport::fail(i, "receipts differ on replay");
        if (world.state_root() != b.block.state_root) return VerifyReport::fail(i, "state root differs on replay");
    }
    out = std::move(world);
    return VerifyReport::pass();
}

void append_record(const std::filesystem::path& path, const SealedBlock& b) {
    const Bytes record = encode_sealed(b);
    Writer w;
    w.u32(static_cast<std::uint32_t>(record.size()));
    w.raw(record);
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out.write(reinterpret_cast<const char*>(w.data().data()), static_cast<std::streamsize>(w.data().size()));
    out.flush();
    if (!out) throw Error(ErrorCode::io_error, "cannot append to journal", path.string());
}

}  // namespace

std::vector<SealedBlock> read_journal(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "cannot open journal", path.string());
    const Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < journal_magic.size() ||
        !std::equal(journal_magic.begin(), journal_magic.end(), data.begin())) {
        throw Error(ErrorCode::corrupt_data, "not a journal file", path.string());
    }
    Reader r(ByteView(data).subspan(journal_magic.size()));
    std::vector<SealedBlock> blocks;
    while (!r.done()) {
        const std::size_t n = blocks.size();
        try {
            const std::uint32_t len = r.u32();
            blocks.push_back(decode_sealed(r.raw(len)));
        } catch (const Error& e) {
            throw Error(ErrorCode::corrupt_data, "journal record for block " + std::to_string(n) + " is unreadable",
                        e.what());
        }
    }
    return blocks;
}


VerifyReport verify_chain(std::span<const SealedBlock> blocks, parallel::Exec exec) {
    if (blocks.empty()) return VerifyReport::fail(0, "empty chain");
    const KeyIndex keys = collect_keys(blocks);
    auto bad = parallel::first_failure(
        blocks.size(), [&](std::size_t i) { return check_block(blocks, i, keys).empty(); }, exec);
    if (bad) return VerifyReport::fail(*bad, check_block(blocks, *bad, keys));
    WorldState world;
    return replay_into(blocks, world);
}

WorldState replay(std::span<const SealedBlock> blocks) {
    WorldState world;
    auto report = replay_into(blocks, world);
    if (!report.ok) {
        throw Error(ErrorCode::corrupt_data, "replay failed at block " + std::to_string(*report.block), report.reason);
    }
    return world;
}

Delegation make_delegation(const crypto::KeyPair& principal, const Digest& request_digest) {
    Delegation d;
    d.principal = crypto::derive_address(principal.public_key);
    d.request_digest = request_digest;
    d.principal_signature = crypto::sign(request_digest.view(), principal).bytes;
    return d;
}

std::unique_ptr<Ledger> Ledger::create(const crypto::KeyPair& operator_keys, const GenesisConfig& config,
                                       std::optional<std::filesystem::path> journal) {
    if (config.distributor_balance == 0) throw Error(ErrorCode::invalid_argument, "distributor balance must be positive");
    std::unique_ptr<Ledger> ledger(new Ledger());
    ledger->operator_ = operator_keys;

    Transaction tx;
    tx.sender = crypto::derive_address(operator_keys.public_key);
    tx.payload = contract::Genesis{operator_keys.public_key, config.distributor_balance, config.grant_amount, config.gas};
    tx.signature = crypto::sign(tx.signing_bytes(), operator_keys).bytes;
    WorldState world = apply_genesis(tx);

    auto sealed = std::make_shared<SealedBlock>();
    sealed->block.index = 0;
    sealed->block.txs = {tx};
    sealed->block.state_root = world.state_root();
    sealed->block.block_hash = sealed->block.compute_hash();
    sealed->receipts = {genesis_receipt(tx)};
    sealed->sealed_at_ms = now_ms();

    if (journal) {
        if (std::filesystem::exists(*journal)) {
            throw Error(ErrorCode::already_exists, "journal already exists", journal->string());
        }
        std::ofstream out(*journal, std::ios::binary);
        out.write(journal_magic.data(), static_cast<std::streamsize>(journal_magic.size()));
        if (!out) throw Error(ErrorCode::io_error, "cannot create journal", journal->string());
        out.close();
        append_record(*journal, *sealed);
        ledger->journal_ = journal;
    }
    ledger->blocks_.push_back(std::move(sealed));
    ledger->state_ = std::make_shared<const WorldState>(std::move(world));
    return ledger;
}

std::unique_ptr<Ledger> Ledger::open(const std::filesystem::path& journal, std::optional<crypto::KeyPair> operator_keys) {
    const auto blocks = read_journal(journal);
    const auto report = ledger::verify_chain(blocks);
    if (!report.ok) {
        throw Error(ErrorCode::corrupt_data,
                    "journal fails verification at block " + std::to_string(report.block.value_or(0)), report.reason);
    }
    std::unique_ptr<Ledger> ledger(new Ledger());
    WorldState world = replay(blocks);
    if (operator_keys && crypto::derive_address(operator_keys->public_key) != world.distributor) {
        throw Error(ErrorCode::unauthorized, "operator key does not match the chain's distributor");
    }
    ledger->operator_ = std::move(operator_keys);
    ledger->journal_ = journal;
    for (const auto& b : blocks) ledger->blocks_.push_back(std::make_shared<const SealedBlock>(b));
    ledger->state_ = std::make_shared<const WorldState>(std::move(world));
    return ledger;
}

const crypto::KeyPair& Ledger::operator_keys() const {
    if (!operator_) throw Error(ErrorCode::unauthorized, "ledger opened without operator keys");
    return *operator_;
}

Address Ledger::operator_address() const { return snapshot()->distributor; }

std::uint64_t Ledger::height() const {
    std::shared_lock lock(read_mu_);
    return blocks_.size();
}

Address Ledger::register_account(const PublicKey& pub, contract::Role role, const std::string& display_name) {
    const Address addr = crypto::derive_address(pub);
    std::lock_guard lock(write_mu_);
    if (state_->accounts.contains(addr)) throw Error(ErrorCode::already_exists, "account already registered", addr.hex());
    auto tx = sign_locked(*state_, operator_keys(), contract::RegisterAccount{pub, role, display_name}, std::nullopt, 0);
    seal_locked({tx}, true);
    return addr;
}

Receipt Ledger::grant_ether(const Address& to) {
    std::lock_guard lock(write_mu_);
    const auto& world = *state_;
    auto it = world.accounts.find(to);
    if (it == world.accounts.end()) throw Error(ErrorCode::not_found, "no such account", to.hex());
    if (it->second.granted) throw Error(ErrorCode::already_exists, "grant already issued", to.hex());
    const std::uint64_t fee = world.gas.fee(contract::PayloadKind::grant_ether);
    if (world.accounts.at(world.distributor).balance < world.grant_amount + fee) {
        throw Error(ErrorCode::insufficient_balance, "distributor exhausted");
    }
    auto tx = sign_locked(world, operator_keys(), contract::GrantEther{to}, std::nullopt, 0);
    return seal_locked({tx}, true).front();
}

Receipt Ledger::submit_transaction(const Transaction& tx) {
    std::lock_guard lock(write_mu_);
    return seal_locked({tx}, false).front();
}

std::vector<Receipt> Ledger::submit_batch(const std::vector<Transaction>& txs, bool atomic) {
    std::lock_guard lock(write_mu_);
    return seal_locked(txs, atomic);
}

Receipt Ledger::submit(const crypto::KeyPair& signer, Payload payload, std::optional<Delegation> delegation) {
    std::lock_guard lock(write_mu_);
    auto tx = sign_locked(*state_, signer, std::move(payload), std::move(delegation), 0);
    return seal_locked({tx}, false).front();
}

std::vector<Receipt> Ledger::submit_all(const std::vector<Request>& requests, bool atomic) {
    std::lock_guard lock(write_mu_);
    std::map<PublicKey, std::uint64_t> offsets;
    std::vector<Transaction> txs;
    for (const auto& req : requests) {
        if (!req.signer) throw Error(ErrorCode::invalid_argument, "request without signer");
        auto& offset = offsets[req.signer->public_key];
        txs.push_back(sign_locked(*state_, *req.signer, req.payload, req.delegation, offset++));
    }
    return seal_locked(txs, atomic);
}

Transaction Ledger::prepare(const crypto::KeyPair& signer, Payload payload, std::optional<Delegation> delegation) const {
    return sign_locked(*snapshot(), signer, std::move(payload), std::move(delegation), 0);
}

Transaction Ledger::sign_locked(const WorldState& world, const crypto::KeyPair& signer, Payload payload,
                                std::optional<Delegation> delegation, std::uint64_t nonce_offset) const {
    Transaction tx;
    tx.sender = crypto::derive_address(signer.public_key);
    auto it = world.accounts.find(tx.sender);
    tx.nonce = (it == world.accounts.end() ? 0 : it->second.nonce) + nonce_offset;
    tx.gas_fee = world.gas.fee(contract::kind_of(payload));
    tx.timestamp = height();
    tx.payload = std::move(payload);
    tx.delegation = std::move(delegation);
    tx.signature = crypto::sign(tx.signing_bytes(), signer).bytes;
    return tx;
}

std::vector<Receipt> Ledger::seal_locked(const std::vector<Transaction>& txs, bool atomic) {
    if (txs.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
    WorldState world = *state_;
    const std::uint64_t index = blocks_.size();
    std::vector<Receipt> receipts;
    receipts.reserve(txs.size());
    for (const auto& tx : txs) {
        receipts.push_back(apply_transaction(world, tx, index));
        const auto& r = receipts.back();
        if (atomic && !r.ok) {
            throw Error(r.code, r.message, "atomic batch rejected at " + std::string(contract::kind_name(contract::kind_of(tx.payload))));
        }
    }
    auto sealed = std::make_shared<SealedBlock>();
    sealed->block.index = index;
    sealed->block.prev_hash = blocks_.back()->block.block_hash;
    sealed->block.txs = txs;
    sealed->block.state_root = world.state_root();
    sealed->block.block_hash = sealed->block.compute_hash();
    sealed->receipts = receipts;
    sealed->sealed_at_ms = now_ms();
    if (journal_) append_record(*journal_, *sealed);

    auto next = std::make_shared<const WorldState>(std::move(world));
    std::unique_lock lock(read_mu_);
    blocks_.push_back(std::move(sealed));
    state_ = std::move(next);
    return receipts;
}

VerifyReport Ledger::verify_chain(parallel::Exec exec) const {
    const auto copies = export_blocks();
    return ledger::verify_chain(copies, exec);
}

std::shared_ptr<const SealedBlock> Ledger::read_block(std::uint64_t index) const {
    std::shared_lock lock(read_mu_);
    if (index >= blocks_.size()) throw Error(ErrorCode::not_found, "no such block", std::to_string(index));
    return blocks_[index];
}

Account Ledger::read_account(const Address& address) const {
    auto a = find_account(address);
    if (!a) throw Error(ErrorCode::not_found, "no such account", address.hex());
    return *a;
}

std::optional<Account> Ledger::find_account(const Address& address) const {
    auto world = snapshot();
    auto it = world->accounts.find(address);
    if (it == world->accounts.end()) return std::nullopt;
    return it->second;
}

std::shared_ptr<const WorldState> Ledger::snapshot() const {
    std::shared_lock lock(read_mu_);
    return state_;
}

std::vector<std::shared_ptr<const SealedBlock>> Ledger::blocks() const {
    std::shared_lock lock(read_mu_);
    return blocks_;
}

std::vector<SealedBlock> Ledger::export_blocks() const {
    std::vector<SealedBlock> out;
    for (const auto& b : blocks()) out.push_back(*b);
    return out;
}

}  // namespace peerchain::ledger
