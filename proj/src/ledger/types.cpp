#include "peerchain/ledger/types.hpp"

#include "peerchain/contract/contract.hpp"
#include "peerchain/crypto/sm3.hpp"

namespace peerchain::ledger {

namespace {

void put_signing_fields(Writer& w, const Transaction& tx) {
    w.u64(tx.nonce);
    w.fixed(tx.sender);
    w.bytes(contract::encode_payload(tx.payload));
    w.u64(tx.gas_fee);
    w.u64(tx.timestamp);
    w.u8(tx.delegation ? 1 : 0);
    if (tx.delegation) {
        w.fixed(tx.delegation->principal);
        w.fixed(tx.delegation->request_digest);
        w.fixed(tx.delegation->principal_signature);
    }
}

}  // namespace

Bytes Transaction::signing_bytes() const {
    Writer w;
    w.str("peerchain/tx/v1");
    put_signing_fields(w, *this);
    return std::move(w).take();
}

Bytes Transaction::encode() const {
    Writer w;
    put_signing_fields(w, *this);
    w.fixed(signature);
    return std::move(w).take();
}

Transaction Transaction::decode(Reader& r) {
    Transaction tx;
    tx.nonce = r.u64();
    tx.sender = r.fixed<Address>();
    tx.payload = contract::decode_payload(r.bytes());
    tx.gas_fee = r.u64();
    tx.timestamp = r.u64();
    const std::uint8_t has_delegation = r.u8();
    if (has_delegation > 1) throw Error(ErrorCode::corrupt_data, "bad delegation flag");
    if (has_delegation) {
        Delegation d;
        d.principal = r.fixed<Address>();
        d.request_digest = r.fixed<Digest>();
        d.principal_signature = r.fixed<SignatureBytes>();
        tx.delegation = d;
    }
    tx.signature = r.fixed<SignatureBytes>();
    return tx;
}

Digest Transaction::id() const { return crypto::sm3_digest(ByteView(encode())); }

void encode_receipt(Writer& w, const Receipt& r) {
    w.fixed(r.tx_id);
    w.u8(r.ok ? 1 : 0);
    w.u8(static_cast<std::uint8_t>(r.code));
    w.str(r.message);
    w.u64(r.block_index);
    w.u64(r.gas_charged);
    w.fixed(r.payer);
}

Receipt decode_receipt(Reader& r) {
    Receipt out;
    out.tx_id = r.fixed<Digest>();
    out.ok = r.u8() != 0;
    const std::uint8_t code = r.u8();
    if (code > static_cast<std::uint8_t>(ErrorCode::io_error)) throw Error(ErrorCode::corrupt_data, "bad error code");
    out.code = static_cast<ErrorCode>(code);
    out.message = r.str();
    out.block_index = r.u64();
    out.gas_charged = r.u64();
    out.payer = r.fixed<Address>();
    return out;
}

Digest Block::compute_hash() const {
    Writer w;
    w.str("peerchain/block/v1");
    w.u64(index);
    w.fixed(prev_hash);
    w.u32(static_cast<std::uint32_t>(txs.size()));
    for (const auto& tx : txs) w.bytes(tx.encode());
    w.fixed(state_root);
    return crypto::sm3_digest(ByteView(w.data()));
}

Bytes encode_sealed(const SealedBlock& b) {
    Writer w;
    w.u64(b.block.index);
    w.fixed(b.block.prev_hash);
    w.u32(static_cast<std::uint32_t>(b.block.txs.size()));
    for (const auto& tx : b.block.txs) w.bytes(tx.encode());
    w.fixed(b.block.state_root);
    w.fixed(b.block.block_hash);
    w.u32(static_cast<std::uint32_t>(b.receipts.size()));
    for (const auto& r : b.receipts) encode_receipt(w, r);
    w.u64(static_cast<std::uint64_t>(b.sealed_at_ms));
    return std::move(w).take();
}

SealedBlock decode_sealed(ByteView in) {
    Reader r(in);
    SealedBlock b;
    b.block.index = r.u64();
    b.block.prev_hash = r.fixed<Digest>();
    const std::uint32_t ntx = r.u32();
    if (ntx > r.remaining()) throw Error(ErrorCode::corrupt_data, "transaction count exceeds record");
    for (std::uint32_t i = 0; i < ntx; ++i) {
        const Bytes enc = r.bytes();
        Reader tr(enc);
        b.block.txs.push_back(Transaction::decode(tr));
        tr.expect_done();
    }
    b.block.state_root = r.fixed<Digest>();
    b.block.block_hash = r.fixed<Digest>();
    const std::uint32_t nrc = r.u32();
    if (nrc > r.remaining()) throw Error(ErrorCode::corrupt_data, "receipt count exceeds record");
    for (std::uint32_t i = 0; i < nrc; ++i) b.receipts.push_back(decode_receipt(r));
    b.sealed_at_ms = static_cast<std::int64_t>(r.u64());
    r.expect_done();
    return b;
}

const Address& fee_sink_address() {
    static const Address sink = Address::from(crypto::sm3_digest("fee-sink").view().first(20));
    return sink;
}

Digest WorldState::state_root() const {
    Writer w;
    w.str("peerchain/state/v1");
    w.fixed(distributor);
    w.u64(grant_amount);
    w.u64(gas.default_fee);
    w.u32(static_cast<std::uint32_t>(gas.overrides.size()));
    for (const auto& [k, fee] : gas.overrides) {
        w.u8(static_cast<std::uint8_t>(k));
        w.u64(fee);
    }
    w.u32(static_cast<std::uint32_t>(accounts.size()));
    for (const auto& [addr, a] : accounts) {
        w.fixed(addr);
        w.fixed(a.public_key);
        w.u64(a.balance);
        w.u64(a.nonce);
        w.u8(a.granted ? 1 : 0);
        w.u32(static_cast<std::uint32_t>(a.used_requests.size()));
        for (const auto& d : a.used_requests) w.fixed(d);
    }
    contract::encode_state(w, contract);
    return crypto::sm3_digest(ByteView(w.data()));
}

std::uint64_t WorldState::total_supply() const {
    std::uint64_t total = 0;
    for (const auto& [addr, a] : accounts) total += a.balance;
    return total;
}

}  // namespace peerchain::ledger
