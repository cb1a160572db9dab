#include "onionbind/loopback.hpp"

#include <httplib.h>

#include "onionbind/bytes.hpp"
#include "onionbind/errors.hpp"

namespace onionbind::simnet {

namespace {

std::string host_without_port(std::string host) {
    std::size_t colon = host.rfind(':');
    if (colon != std::string::npos)
        host.resize(colon);
    return host;
}

} // namespace

SimHttpServer::SimHttpServer(SimNetwork& net) : net_(net) {}

SimHttpServer::~SimHttpServer() {
    stop();
}

int SimHttpServer::start(int port) {
    server_ = std::make_unique<httplib::Server>();
    server_->Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
        std::string host = host_without_port(req.get_header_value("Host"));
        if (is_onion_host(host)) {
            // The directory's answer rides along in a header; the client does
            // the self-auth check, like a real onion client would.
            std::string label = host.substr(0, onionid::kLabelLength);
            auto key = net_.raw_directory_entry(label);
            if (!key) {
                res.status = 404;
                res.set_header(std::string(kSimErrorHeader), "no directory entry for " + host);
                return;
            }
            res.set_header(std::string(kServiceKeyHeader), to_hex({key->data(), key->size()}));
            auto doc = net_.raw_document(host, req.path);
            if (!doc) {
                res.status = 404;
                res.set_header(std::string(kSimErrorHeader), "no document at " + req.path);
                return;
            }
            res.set_content(*doc, "text/plain");
            return;
        }
        if (is_tor2web_host(host)) {
            std::string label = tor2web_label(host);
            auto key = net_.raw_directory_entry(label);
            if (!key) {
                res.status = 404;
                res.set_header(std::string(kSimErrorHeader), "no directory entry for " + label);
                return;
            }
            onionid::OnionAddress address = onionid::OnionAddress::parse(label);
            if (onionid::derive_onion_address(*key) != address) {
                res.status = 502;
                res.set_header(std::string(kSimErrorHeader), "DirectorySelfAuthFailure");
                return;
            }
            auto doc = net_.raw_document(address.to_string(), req.path);
            if (!doc) {
                res.status = 404;
                res.set_header(std::string(kSimErrorHeader), "no document at " + req.path);
                return;
            }
            res.set_content(net_.apply_tamper(host, *doc), "text/plain");
            return;
        }
        auto doc = net_.raw_document(host, req.path);
        if (!doc) {
            res.status = 404;
            res.set_header(std::string(kSimErrorHeader), "no document at " + req.path);
            return;
        }
        res.set_content(net_.apply_tamper(host, *doc), "text/plain");
    });

    if (port == 0) {
        port_ = server_->bind_to_any_port("127.0.0.1");
        if (port_ < 0)
            throw Error(Errc::IoError, "cannot bind loopback port");
    } else {
        if (!server_->bind_to_port("127.0.0.1", port))
            throw Error(Errc::IoError, "cannot bind port " + std::to_string(port));
        port_ = port;
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void SimHttpServer::stop() {
    if (server_) {
        server_->stop();
        if (thread_.joinable())
            thread_.join();
        server_.reset();
    }
}

HttpNetwork::HttpNetwork(std::string base_url) {
    Url url = Url::parse(base_url);
    std::string host = url.host;
    std::size_t colon = host.rfind(':');
    if (colon == std::string::npos)
        throw Error(Errc::InvalidUrl, "loopback base URL needs an explicit port");
    host_ = host.substr(0, colon);
    port_ = std::stoi(host.substr(colon + 1));
}

Document HttpNetwork::fetch(const Url& url, Channel channel) {
    // Same reachability rules as the in-memory network.
    switch (channel) {
    case Channel::OnionCircuit:
        if (!is_onion_host(url.host))
            throw Error(Errc::ChannelMismatch, "onion circuits reach only .onion hosts");
        break;
    case Channel::Direct:
        if (is_onion_host(url.host) || is_tor2web_host(url.host))
            throw Error(Errc::ChannelMismatch, "direct connections reach only clearnet hosts");
        break;
    case Channel::Tor2webProxy:
        if (!is_tor2web_host(url.host))
            throw Error(Errc::ChannelMismatch,
                        "tor2web reaches only <label>" + std::string(kTor2webSuffix) + " hosts");
        break;
    }

    httplib::Client client(host_, port_);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(5, 0);
    httplib::Headers headers{{"Host", url.host}};
    auto res = client.Get(url.path, headers);
    if (!res)
        throw Error(Errc::NotFound, "connection to loopback network failed: " +
                                        httplib::to_string(res.error()));
    std::string sim_error = res->get_header_value(std::string(kSimErrorHeader));
    if (res->status == 502 && sim_error.starts_with("DirectorySelfAuthFailure"))
        throw Error(Errc::DirectorySelfAuthFailure, "gateway refused: " + url.to_string());
    if (res->status != 200)
        throw Error(Errc::NotFound,
                    sim_error.empty() ? url.to_string() + " -> HTTP " + std::to_string(res->status)
                                      : sim_error);

    if (channel == Channel::OnionCircuit) {
        std::string key_hex = res->get_header_value(std::string(kServiceKeyHeader));
        if (key_hex.size() != crypto::kPublicKeyLen * 2)
            throw Error(Errc::NotFound, "loopback response lacks a service key header");
        Bytes key_bytes = from_hex(key_hex);
        crypto::PublicKey key;
        std::copy(key_bytes.begin(), key_bytes.end(), key.begin());
        onionid::OnionAddress address = onionid::OnionAddress::parse(url.host);
        if (onionid::derive_onion_address(key) != address)
            throw Error(Errc::DirectorySelfAuthFailure,
                        "directory key does not derive to " + address.to_string());
        return Document{res->body, Channel::OnionCircuit, key};
    }
    return Document{res->body, channel, std::nullopt};
}

} // namespace onionbind::simnet
