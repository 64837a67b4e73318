// Administrative command line for a peerchain node.

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "peerchain/engine/workload.hpp"
#include "peerchain/gateway/config.hpp"
#include "peerchain/gateway/server.hpp"
#include "peerchain/gateway/views.hpp"

namespace fs = std::filesystem;
using namespace peerchain;
using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::string dir;
    bool json = false;
};

gateway::GatewayConfig load(const Options& o) {
    auto c = o.config.empty() ? gateway::config_from_env() : gateway::load_config(o.config);
    if (!o.dir.empty()) c.data_dir = o.dir;
    return c;
}

void emit(const Options& o, const json& j, const std::string& text) {
    if (o.json) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << text << "\n";
    }
}

gateway::Gateway* running = nullptr;

extern "C" void on_signal(int) {
    if (running) running->stop();
}

int cmd_init(const Options& o, std::optional<std::uint64_t> seed, const std::vector<std::string>& groups) {
    auto c = load(o);
    if (seed) c.node.seed = seed;
    c.groups.insert(c.groups.end(), groups.begin(), groups.end());
    if (fs::exists(c.data_dir / "node.json")) {
        throw Error(ErrorCode::already_exists, "node already initialized", c.data_dir.string());
    }
    auto e = gateway::open_or_init(c);
    emit(o,
         {{"dir", c.data_dir.string()}, {"operator", e->operator_address().hex()}, {"height", e->ledger().height()}},
         "initialized " + c.data_dir.string() + " operator=" + e->operator_address().hex() +
             " height=" + std::to_string(e->ledger().height()));
    return 0;
}

int cmd_serve(const Options& o, std::optional<int> port) {
    auto c = load(o);
    if (port) c.port = *port;
    auto e = gateway::open_or_init(c);
    gateway::Gateway gw(*e, c);
    const int bound = gw.bind();
    running = &gw;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    emit(o, {{"host", c.host}, {"port", bound}, {"height", e->ledger().height()}},
         "listening on " + c.host + ":" + std::to_string(bound) + " height=" + std::to_string(e->ledger().height()));
    std::cout.flush();
    gw.run();
    running = nullptr;
    return 0;
}

int cmd_verify(const Options& o, bool serial) {
    const auto c = load(o);
    std::vector<ledger::SealedBlock> blocks;
    ledger::VerifyReport report;
    try {
        blocks = ledger::read_journal(c.data_dir / "chain.journal");
        report = ledger::verify_chain(blocks, serial ? parallel::Exec::serial : parallel::Exec::parallel);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::corrupt_data) throw;
        report = ledger::VerifyReport::fail(blocks.size(), std::string(e.what()) + ": " + e.detail());
    }
    if (report.ok) {
        emit(o, gateway::verify_json(report, blocks.size()), "OK, height=" + std::to_string(blocks.size()));
        return 0;
    }
    emit(o, gateway::verify_json(report, blocks.size()),
         "FAILED at block " + std::to_string(report.block.value_or(0)) + ": " + report.reason);
    return 1;
}

int cmd_show(const Options& o, std::uint64_t index) {
    const auto c = load(o);
    const auto blocks = ledger::read_journal(c.data_dir / "chain.journal");
    if (index >= blocks.size()) throw Error(ErrorCode::not_found, "no such block", std::to_string(index));
    const auto j = gateway::block_json(blocks[index]);
    if (o.json) {
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "block " << j["index"] << "\n"
              << "  hash       " << j["block_hash"].get<std::string>() << "\n"
              << "  prev_hash  " << j["prev_hash"].get<std::string>() << "\n"
              << "  state_root " << j["state_root"].get<std::string>() << "\n";
    for (const auto& tx : j["transactions"]) {
        std::cout << "  tx " << tx["id"].get<std::string>().substr(0, 16) << " " << tx["payload"]["kind"].get<std::string>()
                  << " sender=" << tx["sender"].get<std::string>() << " nonce=" << tx["nonce"];
        if (tx.contains("receipt") && !tx["receipt"]["ok"].get<bool>()) {
            std::cout << " FAILED(" << tx["receipt"]["code"].get<std::string>() << ")";
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_account(const Options& o, const std::string& address) {
    const auto c = load(o);
    const auto state = ledger::replay(ledger::read_journal(c.data_dir / "chain.journal"));
    const auto addr = crypto::Address::from_hex(address);
    auto it = state.accounts.find(addr);
    if (it == state.accounts.end()) throw Error(ErrorCode::not_found, "unknown account", address);
    const auto j = gateway::account_json(it->second, state.contract);
    std::string text = "account " + address + "\n  balance " + std::to_string(it->second.balance) + "\n  nonce   " +
                       std::to_string(it->second.nonce);
    if (j.contains("name")) {
        text += "\n  name    " + j["name"].get<std::string>() + "\n  role    " + j["role"].get<std::string>();
    }
    emit(o, j, text);
    return 0;
}

int cmd_replay(const Options& o, const std::string& spec_path, std::uint64_t seed) {
    auto c = load(o);
    const auto spec = engine::load_workload(spec_path);
    std::optional<fs::path> scratch;
    if (o.dir.empty()) {
        scratch = fs::temp_directory_path() / ("peerchain-replay-" + std::to_string(::getpid()));
        fs::remove_all(*scratch);
        c.data_dir = *scratch;
    }
    c.node.seed = seed;
    engine::ReplayReport report;
    try {
        auto e = engine::Engine::init(c.data_dir, c.node);
        report = engine::replay_workload(*e, spec, seed);
    } catch (...) {
        if (scratch) fs::remove_all(*scratch);
        throw;
    }
    if (scratch) fs::remove_all(*scratch);

    json counts = report.counts;
    json j = {{"counts", counts},
              {"expected_rejections", report.expected_rejections},
              {"seconds", report.seconds},
              {"seconds_by_kind", report.seconds_by_kind},
              {"height", report.height},
              {"transactions", report.transactions},
              {"chain_ok", report.chain_ok},
              {"state_root", report.state_root.hex()}};
    if (!report.chain_ok) j["chain_reason"] = report.chain_reason;
    std::string text;
    for (const auto& [kind, n] : report.counts) text += kind + "=" + std::to_string(n) + " ";
    text += "\nexpected_rejections=" + std::to_string(report.expected_rejections) +
            " height=" + std::to_string(report.height) + " transactions=" + std::to_string(report.transactions) +
            "\nverify_chain=" + (report.chain_ok ? std::string("true") : "false (" + report.chain_reason + ")") +
            " state_root=" + report.state_root.hex() + "\nseconds=" + std::to_string(report.seconds);
    emit(o, j, text);
    return report.chain_ok ? 0 : 1;
}

int cmd_generate(const Options& o, const engine::WorkloadShape& shape, std::uint64_t seed, const std::string& out) {
    const auto text = engine::format_workload(engine::generate_workload(shape, seed));
    if (out.empty() || out == "-") {
        std::cout << text;
        return 0;
    }
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw Error(ErrorCode::io_error, "cannot write workload", out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"peerchain node administration"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    Options o;
    app.add_option("--config", o.config, "config file (default: $BR_CONFIG)");
    app.add_option("--dir", o.dir, "node directory, overrides the config");
    app.add_flag("--json", o.json, "machine-readable output");

    std::optional<std::uint64_t> init_seed;
    std::vector<std::string> init_groups;
    auto* init = app.add_subcommand("init", "create a node with its genesis block");
    init->add_option("--seed", init_seed, "derive every key from this seed");
    init->add_option("--group", init_groups, "create an authority group")->take_all();

    std::optional<int> port;
    auto* serve = app.add_subcommand("serve", "run the HTTP API");
    serve->add_option("--port", port, "listen port, 0 for any free port");

    auto* chain = app.add_subcommand("chain", "inspect the chain");
    chain->require_subcommand(1);
    bool serial = false;
    auto* verify = chain->add_subcommand("verify", "verify hashes, links, signatures and state roots");
    verify->add_flag("--serial", serial, "use the serial reference kernel");
    std::uint64_t block_index = 0;
    auto* show = chain->add_subcommand("show", "print one block");
    show->add_option("index", block_index, "block index")->required();

    std::string address;
    auto* account = app.add_subcommand("account", "inspect accounts");
    account->require_subcommand(1);
    auto* account_show = account->add_subcommand("show", "print one account");
    account_show->add_option("address", address, "address, hex")->required();

    std::string spec_path;
    std::uint64_t replay_seed = 1;
    auto* replay = app.add_subcommand("replay", "replay a workload file into a fresh node");
    replay->add_option("spec", spec_path, "workload file")->required()->check(CLI::ExistingFile);
    replay->add_option("--seed", replay_seed, "seed for keys and texts");

    engine::WorkloadShape shape;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    auto* workload = app.add_subcommand("workload", "workload files");
    workload->require_subcommand(1);
    auto* generate = workload->add_subcommand("generate", "write a generated workload");
    generate->add_option("--seed", gen_seed);
    generate->add_option("--users", shape.users);
    generate->add_option("--experts", shape.experts);
    generate->add_option("--groups", shape.groups);
    generate->add_option("--articles", shape.articles);
    generate->add_option("--comments", shape.comments);
    generate->add_option("--annotations", shape.annotations);
    generate->add_option("--modifications", shape.modifications);
    generate->add_option("-o,--output", gen_out, "output file, '-' for stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*init) return cmd_init(o, init_seed, init_groups);
        if (*serve) return cmd_serve(o, port);
        if (*verify) return cmd_verify(o, serial);
        if (*show) return cmd_show(o, block_index);
        if (*account_show) return cmd_account(o, address);
        if (*replay) return cmd_replay(o, spec_path, replay_seed);
        if (*generate) return cmd_generate(o, shape, gen_seed, gen_out);
    } catch (const Error& e) {
        if (o.json) {
            std::cerr << gateway::error_json(e).dump() << "\n";
        } else {
            std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what();
            if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
            std::cerr << "\n";
        }
        return 2;
    }
    return 1;
}
