#pragma once

#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "peerchain/engine/engine.hpp"
#include "peerchain/gateway/auth.hpp"
#include "peerchain/gateway/config.hpp"

namespace httplib {
class Server;
}

namespace peerchain::gateway {

struct CaseLess {
    bool operator()(const std::string& a, const std::string& b) const;
};

struct HttpRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string, CaseLess> headers;
    std::string body;
    std::string remote;
};

struct HttpResponse {
    int status = 200;
    nlohmann::json body;
};

int http_status(ErrorCode code);

/// The /api/v1 surface over one engine. `handle` is transport-free; `bind`
/// and `run` put it behind an HTTP listener.
class Gateway {
public:
    Gateway(engine::Engine& engine, GatewayConfig config, Clock clock = system_seconds);
    ~Gateway();

    HttpResponse handle(const HttpRequest& request);

    /// Binds the configured address; port 0 picks a free one. Returns the port.
    int bind();
    /// Serves until stop(). Call after bind().
    void run();
    void stop();

private:
    HttpResponse dispatch(const HttpRequest& request);
    Caller caller(const HttpRequest& request);

    engine::Engine& engine_;
    GatewayConfig config_;
    Authenticator auth_;
    std::unique_ptr<httplib::Server> http_;
};

}  // namespace peerchain::gateway
