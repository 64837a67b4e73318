#pragma once

#include <json.hpp>

#include "peerchain/engine/engine.hpp"
#include "peerchain/ledger/ledger.hpp"

namespace peerchain::gateway {

/// JSON shapes shared by the HTTP API and the CLI. Bytes are lowercase hex.
/// Key shares, wrapped keys and other ciphertext never appear.
nlohmann::json error_json(const Error& e);
nlohmann::json payload_json(const contract::Payload& p);
nlohmann::json block_json(const ledger::SealedBlock& b);
nlohmann::json account_json(const ledger::Account& a, const contract::State& state);
nlohmann::json article_json(const engine::ArticleView& v);
nlohmann::json comment_json(const engine::CommentView& c);
nlohmann::json verify_json(const ledger::VerifyReport& r, std::uint64_t height);

}  // namespace peerchain::gateway
