#include "peerchain/gateway/server.hpp"

#include <charconv>
#include <regex>

#include <httplib.h>

#include "peerchain/gateway/views.hpp"

namespace peerchain::gateway {

using nlohmann::json;
using engine::Actor;

namespace {

const std::regex kArticle(R"(/api/v1/articles/([^/]+))");
const std::regex kArticleAction(R"(/api/v1/articles/([^/]+)/(review|endorsements|comments|versions))");
const std::regex kBlock(R"(/api/v1/chain/blocks/([0-9]+))");

json parse_body(const std::string& body) {
    try {
        auto j = json::parse(body);
        if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, "malformed JSON body", e.what());
    }
}

template <typename T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::invalid_argument, "missing field", key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::invalid_argument, "wrong type for field", key);
    }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

contract::Role parse_role(const std::string& s) {
    if (s == "scholar") return contract::Role::scholar;
    if (s == "expert") return contract::Role::expert;
    throw Error(ErrorCode::invalid_argument, "role must be scholar or expert", s);
}

std::optional<std::string> optional_string(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return field<std::string>(j, key);
}

}  // namespace

bool CaseLess::operator()(const std::string& a, const std::string& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
        return std::tolower(static_cast<unsigned char>(x)) < std::tolower(static_cast<unsigned char>(y));
    });
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return 400;
        case ErrorCode::bad_signature:
        case ErrorCode::stale_timestamp:
        case ErrorCode::unknown_identity: return 401;
        case ErrorCode::insufficient_balance: return 402;
        case ErrorCode::unauthorized: return 403;
        case ErrorCode::not_found: return 404;
        case ErrorCode::already_exists:
        case ErrorCode::invalid_state:
        case ErrorCode::nonce_replay:
        case ErrorCode::replayed_request: return 409;
        case ErrorCode::consensus_failed: return 422;
        case ErrorCode::rate_limited: return 429;
        case ErrorCode::decrypt_failure:
        case ErrorCode::digest_mismatch:
        case ErrorCode::tamper_alarm:
        case ErrorCode::corrupt_data:
        case ErrorCode::io_error: return 500;
    }
    return 500;
}

Gateway::Gateway(engine::Engine& engine, GatewayConfig config, Clock clock)
    : engine_(engine),
      config_(std::move(config)),
      auth_(engine.ledger(), config_.skew_seconds, config_.rate_limit, std::move(clock)) {}

Gateway::~Gateway() = default;

HttpResponse Gateway::handle(const HttpRequest& request) {
    try {
        return dispatch(request);
    } catch (const Error& e) {
        return {http_status(e.code()), error_json(e)};
    } catch (const std::exception& e) {
        return {500, {{"code", "internal"}, {"message", "internal error"}, {"detail", e.what()}}};
    }
}

Caller Gateway::caller(const HttpRequest& r) {
    auto header = [&](std::string_view name) -> const std::string* {
        auto it = r.headers.find(std::string(name));
        return it == r.headers.end() ? nullptr : &it->second;
    };
    return auth_.authenticate(r.method, r.path, header(kIdentityHeader), header(kTimestampHeader),
                              header(kSignatureHeader), r.body);
}

HttpResponse Gateway::dispatch(const HttpRequest& r) {
    const auto& path = r.path;
    std::smatch m;
    const bool get = r.method == "GET";
    const bool post = r.method == "POST";

    if (get && path == "/api/v1/healthz") {
        return {200, {{"status", "ok"}, {"height", engine_.ledger().height()}}};
    }
    if (get && path == "/api/v1/chain/height") return {200, {{"height", engine_.ledger().height()}}};
    if (get && path == "/api/v1/chain/verify") {
        return {200, verify_json(engine_.ledger().verify_chain(), engine_.ledger().height())};
    }
    if (get && std::regex_match(path, m, kBlock)) {
        std::uint64_t n = 0;
        const auto s = m[1].str();
        if (std::from_chars(s.data(), s.data() + s.size(), n).ec != std::errc()) {
            throw Error(ErrorCode::not_found, "no such block", s);
        }
        return {200, block_json(*engine_.ledger().read_block(n))};
    }

    if (post && path == "/api/v1/users") {
        auth_.admit("register:" + r.remote);
        const auto body = parse_body(r.body);
        const auto role = parse_role(field_or<std::string>(body, "role", "scholar"));
        const auto groups = field_or<std::vector<std::string>>(body, "groups", {});
        if (!config_.open_enrollment && (role == contract::Role::expert || !groups.empty())) {
            throw Error(ErrorCode::unauthorized, "enrollment is closed", "groups and the expert role need the operator");
        }
        const auto pub = crypto::PublicKey::from_hex(field<std::string>(body, "public_key"));
        const auto address = engine_.register_public_key(pub, role, field<std::string>(body, "name"), groups);
        const auto account = engine_.ledger().read_account(address);
        return {201, account_json(account, engine_.ledger().snapshot()->contract)};
    }

    if (path == "/api/v1/articles" && (get || post)) {
        const auto who = caller(r);
        if (get) {
            const auto state = engine_.ledger().snapshot();
            json list = json::array();
            for (const auto& id : engine_.visible_articles(who.address)) {
                const auto& f = state->contract.files.at(id);
                list.push_back({{"article_id", id},
                                {"group", f.group},
                                {"uploader", f.uploader.hex()},
                                {"state_flag", static_cast<int>(f.state_flag)},
                                {"version", f.version},
                                {"access", contract::access_level_name(
                                               contract::access_level(state->contract, who.address, f))}});
            }
            return {200, {{"articles", std::move(list)}}};
        }
        const auto body = parse_body(r.body);
        const auto id = engine_.submit_article(Actor::remote(who.address, who.delegation),
                                               field<std::string>(body, "text"), field<std::string>(body, "group"),
                                               optional_string(body, "article_id"));
        return {201, article_json(engine_.read_article(Actor::remote(who.address), id))};
    }

    if (post && std::regex_match(path, m, kArticleAction)) {
        const auto who = caller(r);
        const auto body = parse_body(r.body);
        const auto id = m[1].str();
        const auto action = m[2].str();
        const auto actor = Actor::remote(who.address, who.delegation);
        if (action == "review") {
            contract::ThresholdConfig t;
            t.expert_quorum = field<std::uint32_t>(body, "quorum");
            t.ratio_num = field<std::uint32_t>(body, "ratio_num");
            t.ratio_den = field<std::uint32_t>(body, "ratio_den");
            engine_.run_review(actor, id, t);
        } else if (action == "endorsements") {
            const auto v = field<std::string>(body, "verdict");
            if (v != "favorable" && v != "unfavorable") {
                throw Error(ErrorCode::invalid_argument, "verdict must be favorable or unfavorable", v);
            }
            engine_.cast_endorsement(actor, id, v == "favorable" ? contract::Verdict::favorable
                                                                  : contract::Verdict::unfavorable);
        } else if (action == "comments") {
            const auto kind = field_or<std::string>(body, "kind", "comment");
            if (kind != "comment" && kind != "annotation") {
                throw Error(ErrorCode::invalid_argument, "kind must be comment or annotation", kind);
            }
            const auto cid = engine_.post_comment(
                actor, id, kind == "comment" ? contract::InteractionKind::comment : contract::InteractionKind::annotation,
                field<std::string>(body, "body"), optional_string(body, "comment_id"));
            return {201, {{"comment_id", cid}, {"height", engine_.ledger().height()}}};
        } else {
            engine_.modify_article(actor, id, field<std::string>(body, "text"));
        }
        return {action == "review" ? 200 : 201, article_json(engine_.read_article(Actor::remote(who.address), id))};
    }

    if (get && std::regex_match(path, m, kArticle)) {
        const auto who = caller(r);
        const auto actor = Actor::remote(who.address);
        const auto view = engine_.read_article(actor, m[1].str());
        auto j = article_json(view);
        if (view.level == contract::AccessLevel::full) {
            json comments = json::array();
            for (const auto& c : engine_.list_comments(actor, view.article_id)) comments.push_back(comment_json(c));
            j["comments"] = std::move(comments);
        }
        return {200, std::move(j)};
    }

    throw Error(ErrorCode::not_found, "no such endpoint", r.method + " " + path);
}

int Gateway::bind() {
    http_ = std::make_unique<httplib::Server>();
    http_->set_payload_max_length(config_.max_body_bytes);
    auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
        HttpRequest r{req.method, req.path, {}, req.body, req.remote_addr};
        for (const auto& [k, v] : req.headers) r.headers.emplace(k, v);
        const auto out = handle(r);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    http_->Get(".*", adapt);
    http_->Post(".*", adapt);
    const int port = config_.port == 0 ? http_->bind_to_any_port(config_.host)
                                       : (http_->bind_to_port(config_.host, config_.port) ? config_.port : -1);
    if (port < 0) {
        throw Error(ErrorCode::io_error, "cannot bind listen address", config_.host + ":" + std::to_string(config_.port));
    }
    return port;
}

void Gateway::run() {
    if (!http_) throw Error(ErrorCode::invalid_state, "bind() must come first");
    http_->listen_after_bind();
}

void Gateway::stop() {
    if (http_) http_->stop();
}

}  // namespace peerchain::gateway
