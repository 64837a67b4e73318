#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "peerchain/engine/engine.hpp"

namespace peerchain::gateway {

struct RateLimit {
    std::uint32_t requests = 120;
    std::uint32_t window_seconds = 60;
};

/// Read from the JSON file named by BR_CONFIG. Every key is optional; an
/// unknown key is an error so that typos do not silently fall back.
struct GatewayConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "peerchain-node";
    /// Groups created on first start if missing.
    std::vector<std::string> groups;
    /// Registration may name groups and the expert role. When false only
    /// plain scholars without groups can register over HTTP.
    bool open_enrollment = true;
    std::int64_t skew_seconds = 300;
    RateLimit rate_limit;
    std::size_t max_body_bytes = 4 << 20;
    engine::NodeOptions node;
};

GatewayConfig parse_config(std::string_view json_text);
GatewayConfig load_config(const std::filesystem::path& path);
/// load_config($BR_CONFIG), or defaults when the variable is unset.
GatewayConfig config_from_env();

/// Opens the node in `config.data_dir`, or initializes it with
/// `config.node`, then creates any configured group that is missing.
std::unique_ptr<engine::Engine> open_or_init(const GatewayConfig& config);

}  // namespace peerchain::gateway
