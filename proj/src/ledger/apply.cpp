#include <string>

#include "peerchain/contract/contract.hpp"
#include "peerchain/crypto/crypto.hpp"
#include "peerchain/ledger/types.hpp"

namespace peerchain::ledger {

namespace {

[[noreturn]] void reject(ErrorCode code, const std::string& message, std::string detail = {}) {
    throw Error(code, message, std::move(detail));
}

Receipt failed(Receipt r, ErrorCode code, std::string message) {
    r.ok = false;
    r.code = code;
    r.message = std::move(message);
    return r;
}

}  // namespace

WorldState apply_genesis(const Transaction& tx, bool check_signature) {
    const auto* g = std::get_if<contract::Genesis>(&tx.payload);
    if (!g) reject(ErrorCode::invalid_argument, "first transaction must be genesis");
    if (g->distributor_balance == 0) reject(ErrorCode::invalid_argument, "distributor balance must be positive");
    const Address distributor = crypto::derive_address(g->distributor);
    if (tx.sender != distributor) reject(ErrorCode::invalid_argument, "genesis must be sent by the distributor");
    if (tx.nonce != 0 || tx.gas_fee != 0 || tx.timestamp != 0 || tx.delegation) {
        reject(ErrorCode::invalid_argument, "malformed genesis transaction");
    }
    if (check_signature && !crypto::verify(tx.signature.view(), tx.signing_bytes(), g->distributor)) {
        reject(ErrorCode::bad_signature, "genesis signature does not verify");
    }
    WorldState w;
    w.distributor = distributor;
    w.grant_amount = g->grant_amount;
    w.gas = g->gas;
    w.accounts[distributor] = Account{distributor, g->distributor, g->distributor_balance, 1, false, {}};
    w.accounts[fee_sink_address()] = Account{fee_sink_address(), {}, 0, 0, false, {}};
    w.contract.admin = distributor;
    return w;
}

Receipt apply_transaction(WorldState& world, const Transaction& tx, std::uint64_t block_index,
                          bool check_signatures) {
    const auto kind = contract::kind_of(tx.payload);
    if (kind == contract::PayloadKind::genesis) reject(ErrorCode::invalid_argument, "genesis only in block 0");

    auto sit = world.accounts.find(tx.sender);
    if (sit == world.accounts.end() || tx.sender == fee_sink_address()) {
        reject(ErrorCode::unknown_identity, "unknown sender", tx.sender.hex());
    }
    Account& sender = sit->second;
    if (check_signatures && !crypto::verify(tx.signature.view(), tx.signing_bytes(), sender.public_key)) {
        reject(ErrorCode::bad_signature, "transaction signature does not verify");
    }
    if (tx.nonce < sender.nonce) {
        reject(ErrorCode::nonce_replay, "nonce already used", std::to_string(tx.nonce));
    }
    if (tx.nonce > sender.nonce) {
        reject(ErrorCode::invalid_argument, "nonce gap", std::to_string(tx.nonce) + " > " + std::to_string(sender.nonce));
    }
    if (tx.timestamp > block_index) {
        reject(ErrorCode::stale_timestamp, "timestamp is ahead of the chain", std::to_string(tx.timestamp));
    }
    const std::uint64_t fee = world.gas.fee(kind);
    if (tx.gas_fee < fee) {
        reject(ErrorCode::invalid_argument, "gas fee below schedule", std::to_string(tx.gas_fee) + " < " + std::to_string(fee));
    }

    Account* payer = &sender;
    if (tx.delegation) {
        const auto& d = *tx.delegation;
        auto pit = world.accounts.find(d.principal);
        if (pit == world.accounts.end() || d.principal == fee_sink_address()) {
            reject(ErrorCode::unknown_identity, "unknown principal", d.principal.hex());
        }
        if (check_signatures &&
            !crypto::verify(d.principal_signature.view(), d.request_digest.view(), pit->second.public_key)) {
            reject(ErrorCode::bad_signature, "principal signature does not verify");
        }
        if (pit->second.used_requests.contains(d.request_digest)) {
            reject(ErrorCode::replayed_request, "request already executed", d.request_digest.hex());
        }
        payer = &pit->second;
    }
    if (payer->balance < tx.gas_fee) {
        reject(ErrorCode::insufficient_balance, "balance below gas fee", payer->address.hex());
    }

    // From here on the transaction is sealed whatever the payload does.
    payer->balance -= tx.gas_fee;
    world.accounts.at(fee_sink_address()).balance += tx.gas_fee;
    sender.nonce += 1;
    if (tx.delegation) payer->used_requests.insert(tx.delegation->request_digest);

    Receipt receipt;
    receipt.tx_id = tx.id();
    receipt.block_index = block_index;
    receipt.gas_charged = tx.gas_fee;
    receipt.payer = payer->address;
    const Address caller = tx.delegation ? tx.delegation->principal : tx.sender;

    if (const auto* grant = std::get_if<contract::GrantEther>(&tx.payload)) {
        if (caller != world.distributor) return failed(receipt, ErrorCode::unauthorized, "only the distributor grants");
        auto to = world.accounts.find(grant->to);
        if (to == world.accounts.end() || grant->to == fee_sink_address()) {
            return failed(receipt, ErrorCode::not_found, "no such account");
        }
        if (to->second.granted) return failed(receipt, ErrorCode::already_exists, "grant already issued");
        Account& dist = world.accounts.at(world.distributor);
        if (dist.balance < world.grant_amount) {
            return failed(receipt, ErrorCode::insufficient_balance, "distributor exhausted");
        }
        dist.balance -= world.grant_amount;
        to->second.balance += world.grant_amount;
        to->second.granted = true;
        return receipt;
    }

    if (const auto* reg = std::get_if<contract::RegisterAccount>(&tx.payload)) {
        Address addr;
        try {
            addr = crypto::derive_address(reg->public_key);
        } catch (const Error& e) {
            return failed(receipt, ErrorCode::invalid_argument, "invalid public key");
        }
        if (world.accounts.contains(addr) || addr == fee_sink_address()) {
            return failed(receipt, ErrorCode::already_exists, "account already registered");
        }
        auto outcome = contract::execute(world.contract, caller, tx.payload, block_index);
        if (!outcome.ok) return failed(receipt, outcome.code, outcome.message);
        world.accounts[addr] = Account{addr, reg->public_key, 0, 0, false, {}};
        return receipt;
    }

    auto outcome = contract::execute(world.contract, caller, tx.payload, block_index);
    if (!outcome.ok) return failed(receipt, outcome.code, outcome.message);
    return receipt;
}

}  // namespace peerchain::ledger
