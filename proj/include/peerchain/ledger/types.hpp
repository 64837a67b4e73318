#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "peerchain/contract/calls.hpp"
#include "peerchain/contract/types.hpp"
#include "peerchain/crypto/types.hpp"
#include "peerchain/error.hpp"

namespace peerchain::ledger {

using contract::GasSchedule;
using contract::Payload;
using crypto::Address;
using crypto::Digest;
using crypto::PublicKey;
using crypto::SignatureBytes;

/// A request signed by `principal` and relayed by the operator. The principal
/// pays the gas and is the contract caller; the operator signs the
/// transaction. `request_digest` can be consumed once per principal.
struct Delegation {
    Address principal;
    Digest request_digest;
    SignatureBytes principal_signature;

    bool operator==(const Delegation&) const = default;
};

struct Transaction {
    std::uint64_t nonce = 0;
    Address sender;
    Payload payload;
    std::uint64_t gas_fee = 0;
    /// Logical time: the chain height at which the sender prepared it.
    std::uint64_t timestamp = 0;
    std::optional<Delegation> delegation;
    SignatureBytes signature;

    /// Everything except the signature.
    Bytes signing_bytes() const;
    Bytes encode() const;
    static Transaction decode(Reader& r);
    Digest id() const;
};

struct Receipt {
    Digest tx_id;
    bool ok = true;
    ErrorCode code = ErrorCode::invalid_argument;
    std::string message;
    std::uint64_t block_index = 0;
    std::uint64_t gas_charged = 0;
    Address payer;

    bool operator==(const Receipt&) const = default;
};

void encode_receipt(Writer& w, const Receipt& r);
Receipt decode_receipt(Reader& r);

struct Block {
    std::uint64_t index = 0;
    Digest prev_hash;
    std::vector<Transaction> txs;
    Digest state_root;
    Digest block_hash;

    /// SM3 over (index, prev_hash, tx list, state_root).
    Digest compute_hash() const;
};

/// A block as kept by the node: the hashed block plus data outside the hash.
struct SealedBlock {
    Block block;
    std::vector<Receipt> receipts;
    /// Unix milliseconds, display only.
    std::int64_t sealed_at_ms = 0;
};

Bytes encode_sealed(const SealedBlock& b);
SealedBlock decode_sealed(ByteView in);

struct Account {
    Address address;
    PublicKey public_key;
    std::uint64_t balance = 0;
    std::uint64_t nonce = 0;
    bool granted = false;
    std::set<Digest> used_requests;
};

/// Ledger accounts plus contract state after some block.
struct WorldState {
    Address distributor;
    std::uint64_t grant_amount = 0;
    GasSchedule gas;
    std::map<Address, Account> accounts;
    contract::State contract;

    Digest state_root() const;
    std::uint64_t total_supply() const;
};

/// SM3("fee-sink") truncated to an address; it has no key.
const Address& fee_sink_address();

struct GenesisConfig {
    std::uint64_t distributor_balance = 1'000'000'000'000ULL;
    std::uint64_t grant_amount = 1'000'000ULL;
    GasSchedule gas;
};

/// Applies one transaction to `world` as part of block `block_index`.
/// Throws Error when the transaction may not be sealed at all (unknown
/// sender, bad signature, nonce, timestamp, gas, delegation, balance). A
/// payload rejected by the contract returns a failed receipt; its gas is still
/// charged and the nonce consumed.
Receipt apply_transaction(WorldState& world, const Transaction& tx, std::uint64_t block_index,
                          bool check_signatures = true);

/// Builds the state described by a genesis transaction.
WorldState apply_genesis(const Transaction& tx, bool check_signature = true);

}  // namespace peerchain::ledger
