#pragma once

#include <memory>
#include <string>
#include <thread>

#include "onionbind/simnet.hpp"

namespace httplib {
class Server;
}

namespace onionbind::simnet {

/* Loopback HTTP frontend for a SimNetwork. Plain HTTP on one port; the logical
 * site is selected by the Host request header:
 *
 *   Host: <label>.onion            body plus X-Onion-Service-Key (directory key)
 *   Host: <label>.tor2web.example  gateway view: resolves the label itself,
 *                                  never exposes the key, applies gateway tampering
 *   Host: anything else            clearnet document, in-transit tampering applied
 *
 * The onion self-auth check stays on the client side, as it would in a real
 * onion client; the server only reports what the (possibly subverted)
 * directory says via the key header.
 */
class SimHttpServer {
public:
    explicit SimHttpServer(SimNetwork& net);
    ~SimHttpServer();

    SimHttpServer(const SimHttpServer&) = delete;
    SimHttpServer& operator=(const SimHttpServer&) = delete;

    // Binds 127.0.0.1 (port 0 picks a free port), starts the listener thread,
    // and returns the bound port.
    int start(int port = 0);
    void stop();

    int port() const { return port_; }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    SimNetwork& net_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = -1;
};

inline constexpr std::string_view kServiceKeyHeader = "X-Onion-Service-Key";
inline constexpr std::string_view kSimErrorHeader = "X-Sim-Error";

// Network implementation that talks to a SimHttpServer. Channel reachability
// rules and the onion self-auth check are enforced here, mirroring SimNetwork.
class HttpNetwork final : public Network {
public:
    explicit HttpNetwork(std::string base_url);

    Document fetch(const Url& url, Channel channel) override;

private:
    std::string host_;
    int port_ = 0;
};

} // namespace onionbind::simnet
