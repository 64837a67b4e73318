#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "openssl_oracle.hpp"
#include "peerchain/engine/workload.hpp"
#include "peerchain/gateway/server.hpp"
#include "peerchain/gateway/views.hpp"
#include "temp_dir.hpp"

using namespace peerchain;
using namespace peerchain::gateway;
using nlohmann::json;

namespace {

void put_u32(Bytes& out, std::size_t n) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
}

void put_field(Bytes& out, std::string_view s) {
    put_u32(out, s.size());
    out.insert(out.end(), s.begin(), s.end());
}

// Canonical request bytes built by hand and hashed with OpenSSL.
Bytes oracle_digest(std::string_view method, std::string_view path, std::string_view ts, std::string_view body) {
    Bytes msg;
    put_field(msg, "peerchain/request");
    put_field(msg, method);
    put_field(msg, path);
    put_field(msg, ts);
    put_field(msg, body);
    return oracle::sm3(msg);
}

struct Fixture {
    TempDir dir;
    GatewayConfig config;
    std::unique_ptr<engine::Engine> engine;
    std::int64_t now = 1'700'000'000;
    std::unique_ptr<Gateway> gateway;

    explicit Fixture(const std::string& name, std::vector<std::string> groups = {"g1"}) : dir(name) {
        config.data_dir = dir.path / "node";
        config.groups = std::move(groups);
        config.node.seed = 4;
        engine = open_or_init(config);
        gateway = std::make_unique<Gateway>(*engine, config, [this] { return now; });
    }

    HttpResponse call(const std::string& method, const std::string& path, const json& body = nullptr) {
        HttpRequest r{method, path, {}, body.is_null() ? "" : body.dump(), "test"};
        return gateway->handle(r);
    }

    HttpResponse signed_call(const crypto::KeyPair& keys, const std::string& method, const std::string& path,
                             const json& body = nullptr, std::optional<std::int64_t> ts = std::nullopt) {
        // a fresh timestamp per call keeps identical requests from looking like replays
        if (!ts) ++now;
        HttpRequest r{method, path, {}, body.is_null() ? "" : body.dump(), "test"};
        const auto h = sign_request(keys, method, path, ts.value_or(now), r.body);
        r.headers = {{"x-br-identity", h.identity}, {"X-BR-Timestamp", h.timestamp}, {"X-BR-SIGNATURE", h.signature}};
        return gateway->handle(r);
    }

    crypto::KeyPair enroll(const std::string& name, const std::string& role, std::vector<std::string> groups) {
        const auto keys = engine::derived_keypair(99, name);
        const auto res = call("POST", "/api/v1/users",
                              {{"public_key", keys.public_key.hex()}, {"name", name}, {"role", role}, {"groups", groups}});
        REQUIRE(res.status == 201);
        return keys;
    }
};

std::string error_code(const HttpResponse& r) { return r.body.value("code", ""); }

}  // namespace

TEST_SUITE("request signing") {
    TEST_CASE("digest matches the canonical encoding") {
        const std::string body = R"({"text":"hello"})";
        const auto ours = request_digest("POST", "/api/v1/articles", 1700000000, body);
        CHECK(Bytes(ours.bytes.begin(), ours.bytes.end()) ==
              oracle_digest("POST", "/api/v1/articles", "1700000000", body));
        CHECK(request_digest("GET", "/api/v1/articles", -5, "").hex() ==
              to_hex(oracle_digest("GET", "/api/v1/articles", "-5", "")));
    }

    TEST_CASE("header signature verifies with OpenSSL over the digest") {
        const auto keys = engine::derived_keypair(1, "signer");
        const auto h = sign_request(keys, "GET", "/api/v1/articles", 42, "");
        CHECK(h.identity == crypto::derive_address(keys.public_key).hex());
        CHECK(h.timestamp == "42");
        CHECK(oracle::sm2_verify(keys.public_key.bytes, oracle_digest("GET", "/api/v1/articles", "42", ""),
                                 from_hex(h.signature), crypto::sm2::default_user_id));
    }
}

TEST_SUITE("authentication") {
    TEST_CASE("each failure has its own code") {
        Fixture f("gw-auth");
        const auto alice = f.enroll("alice", "scholar", {"g1"});

        CHECK(f.signed_call(alice, "GET", "/api/v1/articles").status == 200);

        SUBCASE("missing headers") {
            const auto r = f.call("GET", "/api/v1/articles");
            CHECK(r.status == 403);
            CHECK(error_code(r) == "unauthorized");
        }
        SUBCASE("stale by ten minutes") {
            const auto r = f.signed_call(alice, "GET", "/api/v1/articles", nullptr, f.now - 600);
            CHECK(r.status == 401);
            CHECK(error_code(r) == "stale_timestamp");
            CHECK(error_code(f.signed_call(alice, "GET", "/api/v1/articles", nullptr, f.now + 301)) ==
                  "stale_timestamp");
            CHECK(f.signed_call(alice, "GET", "/api/v1/articles", nullptr, f.now - 300).status == 200);
        }
        SUBCASE("unknown identity") {
            const auto stranger = engine::derived_keypair(99, "stranger");
            CHECK(error_code(f.signed_call(stranger, "GET", "/api/v1/articles")) == "unknown_identity");
        }
        SUBCASE("altered body") {
            HttpRequest r{"POST", "/api/v1/articles", {}, R"({"group":"g1","text":"one"})", "t"};
            const auto h = sign_request(alice, "POST", r.path, f.now, r.body);
            r.headers = {{"X-BR-Identity", h.identity}, {"X-BR-Timestamp", h.timestamp}, {"X-BR-Signature", h.signature}};
            r.body = R"({"group":"g1","text":"two"})";
            const auto res = f.gateway->handle(r);
            CHECK(res.status == 401);
            CHECK(error_code(res) == "bad_signature");
            CHECK(f.engine->ledger().snapshot()->contract.files.empty());
        }
        SUBCASE("malformed headers fail closed") {
            HttpRequest r{"GET", "/api/v1/articles", {}, "", "t"};
            const auto h = sign_request(alice, "GET", r.path, f.now, "");
            r.headers = {{"X-BR-Identity", h.identity}, {"X-BR-Timestamp", h.timestamp + "x"},
                         {"X-BR-Signature", h.signature}};
            CHECK(error_code(f.gateway->handle(r)) == "unauthorized");
            r.headers["X-BR-Timestamp"] = h.timestamp;
            r.headers["X-BR-Signature"] = h.signature.substr(2);
            CHECK(error_code(f.gateway->handle(r)) == "unauthorized");
            r.headers["X-BR-Signature"] = h.signature;
            r.headers["X-BR-Identity"] = "zz";
            CHECK(error_code(f.gateway->handle(r)) == "unauthorized");
        }
    }

    TEST_CASE("a repeated signed request is rejected") {
        Fixture f("gw-replay");
        const auto alice = f.enroll("alice", "scholar", {"g1"});
        const json body = {{"group", "g1"}, {"text", engine::synthesize_text(1, "gw", 200)}, {"article_id", "p1"}};
        HttpRequest r{"POST", "/api/v1/articles", {}, body.dump(), "t"};
        const auto h = sign_request(alice, "POST", r.path, f.now, r.body);
        r.headers = {{"X-BR-Identity", h.identity}, {"X-BR-Timestamp", h.timestamp}, {"X-BR-Signature", h.signature}};
        CHECK(f.gateway->handle(r).status == 201);
        const auto height = f.engine->ledger().height();
        const auto again = f.gateway->handle(r);
        CHECK(again.status == 409);
        CHECK(error_code(again) == "replayed_request");
        CHECK(f.engine->ledger().height() == height);
        // once the window has passed the timestamp check alone rejects it
        f.now += 1000;
        CHECK(error_code(f.gateway->handle(r)) == "stale_timestamp");
    }

    TEST_CASE("rate limit per identity") {
        Fixture f("gw-rate");
        f.config.rate_limit = {3, 60};
        f.gateway = std::make_unique<Gateway>(*f.engine, f.config, [&f] { return f.now; });
        const auto alice = f.enroll("alice", "scholar", {"g1"});
        const auto bob = f.enroll("bob", "scholar", {"g1"});
        for (int i = 0; i < 3; ++i) CHECK(f.signed_call(alice, "GET", "/api/v1/articles", nullptr, f.now - i).status == 200);
        const auto limited = f.signed_call(alice, "GET", "/api/v1/articles", nullptr, f.now - 3);
        CHECK(limited.status == 429);
        CHECK(error_code(limited) == "rate_limited");
        CHECK(f.signed_call(bob, "GET", "/api/v1/articles").status == 200);
        f.now += 60;
        CHECK(f.signed_call(alice, "GET", "/api/v1/articles").status == 200);
    }
}

TEST_SUITE("endpoints") {
    TEST_CASE("register, upload, review, read, comment, modify") {
        Fixture f("gw-flow");
        const auto up = f.enroll("uploader", "scholar", {"g1"});
        const auto e1 = f.enroll("expert1", "expert", {"g1"});
        const auto e2 = f.enroll("expert2", "expert", {"g1"});
        const auto out = f.enroll("outsider", "expert", {});

        const auto acct = f.engine->ledger().read_account(crypto::derive_address(up.public_key));
        CHECK(acct.balance == f.config.node.genesis.grant_amount);

        const auto text = engine::synthesize_text(3, "gw-flow", 240);
        auto r = f.signed_call(up, "POST", "/api/v1/articles", {{"group", "g1"}, {"text", text}, {"article_id", "a1"}});
        REQUIRE(r.status == 201);
        CHECK(r.body["state_flag"] == 0);
        CHECK(r.body["text"] == text);
        CHECK(r.body["plaintext_digest"] == crypto::sm3_digest(text).hex());
        // the transaction is the uploader's, relayed by the operator
        const auto block = f.call("GET", "/api/v1/chain/blocks/" + std::to_string(f.engine->ledger().height() - 1));
        CHECK(block.body["transactions"][0]["payload"]["kind"] == "upload_file");
        CHECK(block.body["transactions"][0]["delegation"]["principal"] == crypto::derive_address(up.public_key).hex());

        CHECK(error_code(f.signed_call(out, "GET", "/api/v1/articles/a1")) == "unauthorized");
        CHECK(f.signed_call(out, "GET", "/api/v1/articles").body["articles"].empty());
        const auto abstract_view = f.signed_call(e1, "GET", "/api/v1/articles/a1");
        CHECK(abstract_view.body["access"] == "abstract_only");
        CHECK_FALSE(abstract_view.body.contains("text"));
        CHECK(abstract_view.body.contains("abstract"));

        r = f.signed_call(up, "POST", "/api/v1/articles/a1/review", {{"quorum", 2}, {"ratio_num", 1}, {"ratio_den", 2}});
        CHECK(r.status == 200);
        CHECK(r.body["state_flag"] == 1);
        CHECK(f.signed_call(e1, "GET", "/api/v1/articles/a1").body["may_endorse"] == true);
        r = f.signed_call(e1, "POST", "/api/v1/articles/a1/endorsements", {{"verdict", "favorable"}});
        CHECK(r.status == 201);
        CHECK(r.body["state_flag"] == 1);
        CHECK(error_code(f.signed_call(out, "POST", "/api/v1/articles/a1/endorsements", {{"verdict", "favorable"}})) ==
              "unauthorized");
        r = f.signed_call(e2, "POST", "/api/v1/articles/a1/endorsements", {{"verdict", "favorable"}});
        CHECK(r.body["state_flag"] == 2);

        r = f.signed_call(e2, "GET", "/api/v1/articles/a1");
        CHECK(r.body["access"] == "full");
        CHECK(r.body["text"] == text);

        r = f.signed_call(e2, "POST", "/api/v1/articles/a1/comments", {{"body", "sound method"}, {"kind", "annotation"}});
        CHECK(r.status == 201);
        const auto revised = engine::synthesize_text(3, "gw-flow/2", 250);
        r = f.signed_call(up, "POST", "/api/v1/articles/a1/versions", {{"text", revised}});
        CHECK(r.status == 201);
        CHECK(r.body["version"] == 2);
        CHECK(r.body["modifications"][0]["digest"] == crypto::sm3_digest(revised).hex());

        r = f.signed_call(e1, "GET", "/api/v1/articles/a1");
        REQUIRE(r.body["comments"].size() == 1);
        CHECK(r.body["comments"][0]["body"] == "sound method");
        CHECK(r.body["comments"][0]["kind"] == "annotation");
        CHECK(r.body["text"] == revised);

        CHECK(f.call("GET", "/api/v1/chain/verify").body["ok"] == true);
    }

    TEST_CASE("errors carry code, message and detail") {
        Fixture f("gw-errors");
        const auto alice = f.enroll("alice", "scholar", {"g1"});
        auto r = f.call("GET", "/api/v1/nothing");
        CHECK(r.status == 404);
        CHECK(r.body.contains("code"));
        CHECK(r.body.contains("message"));
        CHECK(r.body.contains("detail"));
        r = f.signed_call(alice, "POST", "/api/v1/articles", {{"group", "g1"}});
        CHECK(r.status == 400);
        CHECK(r.body["detail"] == "text");
        r = f.call("POST", "/api/v1/users", json::array());
        CHECK(error_code(r) == "invalid_argument");
        r = f.call("POST", "/api/v1/users", {{"public_key", alice.public_key.hex()}, {"name", "again"}});
        CHECK(r.status == 409);
        r = f.signed_call(alice, "POST", "/api/v1/articles/none/review", {{"quorum", 1}, {"ratio_num", 1}, {"ratio_den", 1}});
        CHECK(r.status == 404);
        CHECK(f.call("GET", "/api/v1/chain/blocks/99").status == 404);
        CHECK(f.call("GET", "/api/v1/chain/blocks/99999999999999999999999").status == 404);
    }

    TEST_CASE("closed enrollment admits plain scholars only") {
        Fixture f("gw-closed");
        f.config.open_enrollment = false;
        f.gateway = std::make_unique<Gateway>(*f.engine, f.config, [&f] { return f.now; });
        const auto k = engine::derived_keypair(5, "x");
        CHECK(error_code(f.call("POST", "/api/v1/users",
                                {{"public_key", k.public_key.hex()}, {"name", "x"}, {"groups", {"g1"}}})) ==
              "unauthorized");
        CHECK(f.call("POST", "/api/v1/users", {{"public_key", k.public_key.hex()}, {"name", "x"}}).status == 201);
    }

    TEST_CASE("genesis block and health") {
        Fixture f("gw-genesis", {});
        CHECK(f.call("GET", "/api/v1/healthz").body["height"] == 1);
        CHECK(f.call("GET", "/api/v1/chain/height").body["height"] == 1);
        const auto b = f.call("GET", "/api/v1/chain/blocks/0").body;
        CHECK(b["prev_hash"] == std::string(64, '0'));
        CHECK(b["transactions"][0]["payload"]["kind"] == "genesis");
    }
}

TEST_SUITE("service") {
    TEST_CASE("HTTP round trip on an ephemeral port; no private key leaves the node") {
        TempDir dir("gw-http");
        GatewayConfig config;
        config.data_dir = dir.path / "node";
        config.port = 0;
        config.groups = {"g1"};
        auto engine = open_or_init(config);
        Gateway gw(*engine, config);
        const int port = gw.bind();
        std::thread server([&] { gw.run(); });

        httplib::Client cli("127.0.0.1", port);
        std::vector<std::string> bodies;
        auto post = [&](const crypto::KeyPair* keys, const std::string& path, const json& body) {
            httplib::Headers h;
            const auto text = body.dump();
            if (keys) {
                const auto s = sign_request(*keys, "POST", path, system_seconds(), text);
                h = {{"X-BR-Identity", s.identity}, {"X-BR-Timestamp", s.timestamp}, {"X-BR-Signature", s.signature}};
            }
            auto res = cli.Post(path, h, text, "application/json");
            REQUIRE(res);
            bodies.push_back(res->body);
            return std::make_pair(res->status, json::parse(res->body));
        };
        auto get = [&](const crypto::KeyPair& keys, const std::string& path) {
            const auto s = sign_request(keys, "GET", path, system_seconds(), "");
            auto res = cli.Get(path, {{"X-BR-Identity", s.identity},
                                      {"X-BR-Timestamp", s.timestamp},
                                      {"X-BR-Signature", s.signature}});
            REQUIRE(res);
            bodies.push_back(res->body);
            return std::make_pair(res->status, json::parse(res->body));
        };

        auto health = cli.Get("/api/v1/healthz");
        REQUIRE(health);
        CHECK(json::parse(health->body)["height"] == 2);

        const auto alice = crypto::generate_keypair();
        auto [status, body] = post(nullptr, "/api/v1/users",
                                   {{"public_key", alice.public_key.hex()}, {"name", "alice"}, {"groups", {"g1"}}});
        CHECK(status == 201);
        const auto text = engine::synthesize_text(8, "http", 220);
        std::tie(status, body) = post(&alice, "/api/v1/articles", {{"group", "g1"}, {"text", text}});
        CHECK(status == 201);
        const std::string id = body["article_id"];
        std::tie(status, body) = get(alice, "/api/v1/articles/" + id);
        CHECK(status == 200);
        CHECK(body["text"] == text);
        std::tie(status, body) = post(nullptr, "/api/v1/articles", {{"group", "g1"}, {"text", text}});
        CHECK(status == 403);

        std::ifstream op_key(config.data_dir / "operator.key");
        std::string op_hex;
        op_key >> op_hex;
        for (const auto& b : bodies) {
            CHECK(b.find(alice.private_key.hex()) == std::string::npos);
            CHECK(b.find(op_hex) == std::string::npos);
        }

        gw.stop();
        server.join();
    }

    TEST_CASE("startup refuses a tampered chain") {
        TempDir dir("gw-tamper");
        GatewayConfig config;
        config.data_dir = dir.path / "node";
        config.groups = {"g1", "g2"};
        open_or_init(config).reset();
        CHECK(open_or_init(config)->ledger().height() == 3);

        const auto journal = config.data_dir / "chain.journal";
        {
            std::fstream io(journal, std::ios::binary | std::ios::in | std::ios::out);
            io.seekg(0, std::ios::end);
            const auto size = static_cast<std::streamoff>(io.tellg());
            io.seekg(size - 40);
            char c;
            io.get(c);
            io.seekp(size - 40);
            io.put(static_cast<char>(c ^ 1));
        }
        try {
            open_or_init(config);
            FAIL("tampered chain opened");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::corrupt_data);
            CHECK(std::string(e.what()).find("block") != std::string::npos);
        }
    }
}

TEST_SUITE("config") {
    TEST_CASE("parse values and reject unknown keys") {
        const auto c = parse_config(R"({
            "listen": {"host": "0.0.0.0", "port": 9000},
            "data_dir": "/tmp/x", "groups": ["g1", "g2"], "grant_amount": 500,
            "gas": {"default_fee": 7, "overrides": {"register_account": 0, "endorse": 3}},
            "seed": 12, "pool_seed": 4, "max_attempts": 8,
            "verifier": {"tau": 0.6}, "rate_limit": {"requests": 10, "window_seconds": 5},
            "skew_seconds": 120
        })");
        CHECK(c.host == "0.0.0.0");
        CHECK(c.port == 9000);
        CHECK(c.data_dir == "/tmp/x");
        CHECK(c.groups.size() == 2);
        CHECK(c.node.genesis.grant_amount == 500);
        CHECK(c.node.genesis.gas.fee(contract::PayloadKind::endorse) == 3);
        CHECK(c.node.genesis.gas.fee(contract::PayloadKind::upload_file) == 7);
        CHECK(c.node.seed == 12u);
        CHECK(c.node.summary_seed == 4);
        CHECK(c.node.max_attempts == 8);
        CHECK(c.node.verifier.tau == doctest::Approx(0.6));
        CHECK(c.node.verifier.top_n == summary::VerifierConfig{}.top_n);
        CHECK(c.rate_limit.requests == 10);
        CHECK(c.skew_seconds == 120);

        for (const char* bad : {R"({"prot": 1})", R"({"listen": {"port": 70000}})", R"({"verifier": {"t": 1}})",
                                R"({"gas": {"overrides": {"nope": 1}}})", R"({"groups": ["bad id"]})", "[1,",
                                R"({"rate_limit": {"requests": 0}})"}) {
            CHECK_THROWS_AS(parse_config(bad), Error);
        }
    }

    TEST_CASE("BR_CONFIG names the file") {
        TempDir dir("gw-config");
        std::filesystem::create_directories(dir.path);
        const auto path = dir.path / "config.json";
        std::ofstream(path) << R"({"listen": {"port": 0}, "groups": ["gx"]})";
        ::setenv("BR_CONFIG", path.c_str(), 1);
        const auto c = config_from_env();
        ::unsetenv("BR_CONFIG");
        CHECK(c.port == 0);
        CHECK(c.groups == std::vector<std::string>{"gx"});
        CHECK(config_from_env().port == 8080);
    }
}
