#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "peerchain/crypto/types.hpp"
#include "peerchain/ledger/types.hpp"
#include "peerchain/parallel/kernels.hpp"

namespace peerchain::ledger {

struct VerifyReport {
    bool ok = true;
    std::optional<std::uint64_t> block;
    std::string reason;

    static VerifyReport pass() { return {}; }
    static VerifyReport fail(std::uint64_t block, std::string reason) { return {false, block, std::move(reason)}; }
};

/// Checks a sequence of sealed blocks from genesis: every block hash
/// recomputes, every prev_hash links, every signature verifies, and a replay
/// from genesis reproduces each state_root and receipt list. Reports the
/// first broken block.
VerifyReport verify_chain(std::span<const SealedBlock> blocks, parallel::Exec exec = parallel::Exec::parallel);

/// Decodes a journal file without verifying it. Throws corrupt_data when a
/// record cannot be decoded.
std::vector<SealedBlock> read_journal(const std::filesystem::path& path);

/// Replays `blocks` without signature checks and returns the final state.
/// Throws Error on the first inconsistency.
WorldState replay(std::span<const SealedBlock> blocks);

/// One transaction to be signed by the ledger on behalf of a local key holder.
struct Request {
    const crypto::KeyPair* signer = nullptr;
    Payload payload;
    std::optional<Delegation> delegation;
};

Delegation make_delegation(const crypto::KeyPair& principal, const Digest& request_digest);

/// Single-node chain. Submission is serialized by one writer lock; reads take
/// immutable snapshots and may run concurrently with it.
class Ledger {
public:
    /// Seals a genesis block signed by `operator_keys`, which become the
    /// distributor and the contract administrator. With `journal`, blocks are
    /// appended to that file as they are sealed; the file must not exist.
    static std::unique_ptr<Ledger> create(const crypto::KeyPair& operator_keys, const GenesisConfig& config = {},
                                          std::optional<std::filesystem::path> journal = std::nullopt);

    /// Loads and fully verifies a journal. Throws Error(corrupt_data) naming
    /// the first bad block. Without operator keys the ledger is read-only
    /// for operator conveniences (register_account, grant_ether).
    static std::unique_ptr<Ledger> open(const std::filesystem::path& journal,
                                        std::optional<crypto::KeyPair> operator_keys = std::nullopt);

    Address operator_address() const;
    std::uint64_t height() const;

    /// Operator-signed registration; throws already_exists if the key is known.
    Address register_account(const PublicKey& pub, contract::Role role, const std::string& display_name);
    /// Operator-signed grant of the configured amount; throws on a second
    /// grant or when the distributor cannot cover it.
    Receipt grant_ether(const Address& to);

    /// Seals one externally signed transaction into a new block.
    Receipt submit_transaction(const Transaction& tx);
    /// Seals all transactions into one block. Any pre-validation failure
    /// rejects the whole batch. With `atomic`, a failed payload receipt also
    /// rejects it and nothing is sealed.
    std::vector<Receipt> submit_batch(const std::vector<Transaction>& txs, bool atomic = false);

    /// Signs with current nonces and schedule fees, then seals, all under the
    /// writer lock.
    Receipt submit(const crypto::KeyPair& signer, Payload payload, std::optional<Delegation> delegation = std::nullopt);
    std::vector<Receipt> submit_all(const std::vector<Request>& requests, bool atomic = false);

    /// A signed transaction with the signer's next nonce and the current
    /// height as timestamp. Not submitted.
    Transaction prepare(const crypto::KeyPair& signer, Payload payload,
                        std::optional<Delegation> delegation = std::nullopt) const;

    VerifyReport verify_chain(parallel::Exec exec = parallel::Exec::parallel) const;

    /// Throws not_found for an unknown index or address.
    std::shared_ptr<const SealedBlock> read_block(std::uint64_t index) const;
    Account read_account(const Address& address) const;
    std::optional<Account> find_account(const Address& address) const;

    std::shared_ptr<const WorldState> snapshot() const;
    std::vector<std::shared_ptr<const SealedBlock>> blocks() const;
    /// Copies of all sealed blocks, for offline verification.
    std::vector<SealedBlock> export_blocks() const;

private:
    Ledger() = default;

    Transaction sign_locked(const WorldState& world, const crypto::KeyPair& signer, Payload payload,
                            std::optional<Delegation> delegation, std::uint64_t nonce_offset) const;
    std::vector<Receipt> seal_locked(const std::vector<Transaction>& txs, bool atomic);
    const crypto::KeyPair& operator_keys() const;

    mutable std::shared_mutex read_mu_;
    std::mutex write_mu_;
    std::vector<std::shared_ptr<const SealedBlock>> blocks_;
    std::shared_ptr<const WorldState> state_;
    std::optional<crypto::KeyPair> operator_;
    std::optional<std::filesystem::path> journal_;
};

}  // namespace peerchain::ledger
