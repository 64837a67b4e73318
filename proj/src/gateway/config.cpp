#include "peerchain/gateway/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace peerchain::gateway {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "config section must be an object", std::string(where));
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw Error(ErrorCode::invalid_argument, "unknown config key", std::string(where) + key);
        }
    }
}

using contract::PayloadKind;
constexpr PayloadKind kKinds[] = {
    PayloadKind::register_account, PayloadKind::grant_ether,  PayloadKind::create_group,   PayloadKind::add_member,
    PayloadKind::remove_member,    PayloadKind::set_name,     PayloadKind::upload_file,    PayloadKind::start_review,
    PayloadKind::endorse,          PayloadKind::update_file,  PayloadKind::record_summary, PayloadKind::log_interaction,
};

template <typename T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

GatewayConfig parse_config(std::string_view text) {
    GatewayConfig c;
    try {
        const auto j = json::parse(text);
        check_keys(j, "",
                   {"listen", "data_dir", "groups", "open_enrollment", "skew_seconds", "rate_limit", "max_body_bytes",
                    "grant_amount", "distributor_balance", "gas", "seed", "pool_seed", "max_attempts", "verifier"});
        if (j.contains("listen")) {
            const auto& l = j.at("listen");
            check_keys(l, "listen.", {"host", "port"});
            take(l, "host", c.host);
            take(l, "port", c.port);
        }
        if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
        take(j, "groups", c.groups);
        take(j, "open_enrollment", c.open_enrollment);
        take(j, "skew_seconds", c.skew_seconds);
        take(j, "max_body_bytes", c.max_body_bytes);
        if (j.contains("rate_limit")) {
            const auto& r = j.at("rate_limit");
            check_keys(r, "rate_limit.", {"requests", "window_seconds"});
            take(r, "requests", c.rate_limit.requests);
            take(r, "window_seconds", c.rate_limit.window_seconds);
        }
        take(j, "grant_amount", c.node.genesis.grant_amount);
        take(j, "distributor_balance", c.node.genesis.distributor_balance);
        if (j.contains("gas")) {
            const auto& g = j.at("gas");
            check_keys(g, "gas.", {"default_fee", "overrides"});
            take(g, "default_fee", c.node.genesis.gas.default_fee);
            if (g.contains("overrides")) {
                c.node.genesis.gas.overrides.clear();
                for (const auto& [name, fee] : g.at("overrides").items()) {
                    bool found = false;
                    for (const auto kind : kKinds) {
                        if (contract::kind_name(kind) == name) {
                            c.node.genesis.gas.overrides[kind] = fee.get<std::uint64_t>();
                            found = true;
                        }
                    }
                    if (!found) throw Error(ErrorCode::invalid_argument, "unknown transaction kind in gas.overrides", name);
                }
            }
        }
        if (j.contains("seed")) c.node.seed = j.at("seed").get<std::uint64_t>();
        take(j, "pool_seed", c.node.summary_seed);
        take(j, "max_attempts", c.node.max_attempts);
        if (j.contains("verifier")) {
            const auto& v = j.at("verifier");
            check_keys(v, "verifier.", {"top_n", "tau", "min_fraction", "max_fraction"});
            take(v, "top_n", c.node.verifier.top_n);
            take(v, "tau", c.node.verifier.tau);
            take(v, "min_fraction", c.node.verifier.min_fraction);
            take(v, "max_fraction", c.node.verifier.max_fraction);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, "malformed config", e.what());
    }
    if (c.port < 0 || c.port > 65535) throw Error(ErrorCode::invalid_argument, "port out of range");
    if (c.skew_seconds <= 0) throw Error(ErrorCode::invalid_argument, "skew_seconds must be positive");
    if (c.rate_limit.requests == 0 || c.rate_limit.window_seconds == 0) {
        throw Error(ErrorCode::invalid_argument, "rate_limit values must be positive");
    }
    for (const auto& g : c.groups) {
        if (!contract::valid_identifier(g)) throw Error(ErrorCode::invalid_argument, "bad group id in config", g);
    }
    return c;
}

GatewayConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read config", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const Error& e) {
        throw Error(e.code(), e.what(), path.string() + ": " + e.detail());
    }
}

GatewayConfig config_from_env() {
    const char* path = std::getenv("BR_CONFIG");
    if (!path || !*path) return {};
    return load_config(path);
}

std::unique_ptr<engine::Engine> open_or_init(const GatewayConfig& config) {
    auto engine = std::filesystem::exists(config.data_dir / "node.json") ? engine::Engine::open(config.data_dir)
                                                                         : engine::Engine::init(config.data_dir, config.node);
    const auto state = engine->ledger().snapshot();
    for (const auto& g : config.groups) {
        if (!state->contract.groups.contains(g)) engine->create_group(g);
    }
    return engine;
}

}  // namespace peerchain::gateway
