#pragma once

// HTTP/1.1 front end for Api on top of cpp-httplib.

#include "gnndiag/service/api.hpp"

#include <httplib.h>

#include <memory>
#include <string>

namespace gnndiag {

/// "host:port" -> parts.  A bare port binds to 127.0.0.1.
inline std::pair<std::string, int> parse_bind_address(const std::string& bind) {
    const auto colon = bind.rfind(':');
    const std::string host = colon == std::string::npos ? "127.0.0.1" : bind.substr(0, colon);
    const std::string port_text = colon == std::string::npos ? bind : bind.substr(colon + 1);
    int port = -1;
    const auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (host.empty() || ec != std::errc() || end != port_text.data() + port_text.size() || port < 0 || port > 65535)
        throw ValidationError("bind address must look like host:port, got '" + bind + "'");
    return {host, port};
}

class Server {
public:
    explicit Server(std::shared_ptr<Api> api) : api_(std::move(api)) {
        // SO_REUSEADDR only, so a second instance on a busy port fails to bind.
        http_.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
        });
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            const auto out = api_->handle({req.method, req.path, req.params, req.body});
            res.status = out.status;
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_content(out.body, "application/json");
        };
        http_.Get(".*", handler);
        http_.Post(".*", handler);
        http_.Put(".*", handler);
        http_.Delete(".*", handler);
        http_.Patch(".*", handler);
        http_.Options(".*", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
    }

    /// Binds without serving; port 0 picks a free port.  Returns the port.
    int bind(const std::string& host, int port) {
        const int bound = port == 0 ? http_.bind_to_any_port(host) : (http_.bind_to_port(host, port) ? port : -1);
        if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
        return bound;
    }

    /// Blocks until stop().
    bool listen() { return http_.listen_after_bind(); }

    void stop() { http_.stop(); }
    void wait_until_ready() const { http_.wait_until_ready(); }

private:
    std::shared_ptr<Api> api_;
    httplib::Server http_;
};

} // namespace gnndiag
