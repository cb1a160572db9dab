#include "onionbind/simnet.hpp"

#include "onionbind/errors.hpp"

namespace onionbind::simnet {

std::string_view channel_name(Channel c) {
    switch (c) {
    case Channel::OnionCircuit: return "onion";
    case Channel::Direct: return "direct";
    case Channel::Tor2webProxy: return "tor2web";
    }
    return "?";
}

void SimNetwork::register_site(const std::string& clearnet_host, const std::string& path,
                               std::string body) {
    std::lock_guard lock(mu_);
    documents_[{clearnet_host, path}] = std::move(body);
}

void SimNetwork::register_site(const onionid::OnionAddress& address, const std::string& path,
                               std::string body, const onionid::ServiceIdentity& identity) {
    onionid::OnionAddress derived = onionid::derive_onion_address(identity.public_key);
    if (derived != address)
        throw Error(Errc::AddressKeyMismatch,
                    "key derives to " + derived.to_string() + ", not " + address.to_string());
    std::lock_guard lock(mu_);
    documents_[{address.to_string(), path}] = std::move(body);
    directory_[address.label()] = identity.public_key;
}

Document SimNetwork::fetch(const Url& url, Channel channel) {
    switch (channel) {
    case Channel::OnionCircuit: {
        if (!is_onion_host(url.host))
            throw Error(Errc::ChannelMismatch, "onion circuits reach only .onion hosts");
        onionid::OnionAddress address = onionid::OnionAddress::parse(url.host);
        std::lock_guard lock(mu_);
        auto dir = directory_.find(address.label());
        if (dir == directory_.end())
            throw Error(Errc::NotFound, "no directory entry for " + address.to_string());
        // Self-authentication: the address must be the hash of the key the
        // directory handed back. A substituted key cannot pass.
        if (onionid::derive_onion_address(dir->second) != address)
            throw Error(Errc::DirectorySelfAuthFailure,
                        "directory key does not derive to " + address.to_string());
        auto doc = documents_.find({url.host, url.path});
        if (doc == documents_.end())
            throw Error(Errc::NotFound, url.to_string());
        return Document{doc->second, Channel::OnionCircuit, dir->second};
    }
    case Channel::Direct: {
        if (is_onion_host(url.host) || is_tor2web_host(url.host))
            throw Error(Errc::ChannelMismatch, "direct connections reach only clearnet hosts");
        std::lock_guard lock(mu_);
        auto doc = documents_.find({url.host, url.path});
        if (doc == documents_.end())
            throw Error(Errc::NotFound, url.to_string());
        std::string body = doc->second;
        if (auto hook = tamper_.find(url.host); hook != tamper_.end())
            body = hook->second(std::move(body));
        return Document{std::move(body), Channel::Direct, std::nullopt};
    }
    case Channel::Tor2webProxy: {
        if (!is_tor2web_host(url.host))
            throw Error(Errc::ChannelMismatch,
                        "tor2web reaches only <label>" + std::string(kTor2webSuffix) + " hosts");
        onionid::OnionAddress address = onionid::OnionAddress::parse(tor2web_label(url.host));
        std::lock_guard lock(mu_);
        auto dir = directory_.find(address.label());
        if (dir == directory_.end())
            throw Error(Errc::NotFound, "no directory entry for " + address.to_string());
        // The gateway is an honest onion client internally, but the reader
        // only ever sees what the gateway chooses to relay.
        if (onionid::derive_onion_address(dir->second) != address)
            throw Error(Errc::DirectorySelfAuthFailure,
                        "directory key does not derive to " + address.to_string());
        auto doc = documents_.find({address.to_string(), url.path});
        if (doc == documents_.end())
            throw Error(Errc::NotFound, url.to_string());
        std::string body = doc->second;
        if (auto hook = tamper_.find(url.host); hook != tamper_.end())
            body = hook->second(std::move(body));
        return Document{std::move(body), Channel::Tor2webProxy, std::nullopt};
    }
    }
    throw Error(Errc::ChannelMismatch, "unknown channel");
}

crypto::PublicKey SimNetwork::lookup_service_key(const onionid::OnionAddress& address) const {
    std::lock_guard lock(mu_);
    auto it = directory_.find(address.label());
    if (it == directory_.end())
        throw Error(Errc::NotFound, "no directory entry for " + address.to_string());
    return it->second;
}

void SimNetwork::install_adversary(AdversaryHook hook) {
    std::lock_guard lock(mu_);
    if (auto* o = std::get_if<DirectoryOverride>(&hook)) {
        directory_[o->address.label()] = o->key;
    } else if (auto* t = std::get_if<TamperInTransit>(&hook)) {
        tamper_[t->host] = std::move(t->transform);
    } else if (auto* r = std::get_if<RemoveDocument>(&hook)) {
        documents_.erase({r->host, r->path});
    }
}

std::optional<std::string> SimNetwork::raw_document(const std::string& host,
                                                    const std::string& path) const {
    std::lock_guard lock(mu_);
    auto it = documents_.find({host, path});
    if (it == documents_.end())
        return std::nullopt;
    return it->second;
}

std::optional<crypto::PublicKey> SimNetwork::raw_directory_entry(const std::string& label) const {
    std::lock_guard lock(mu_);
    auto it = directory_.find(label);
    if (it == directory_.end())
        return std::nullopt;
    return it->second;
}

std::string SimNetwork::apply_tamper(const std::string& host, std::string body) const {
    TamperFn fn;
    {
        std::lock_guard lock(mu_);
        auto it = tamper_.find(host);
        if (it == tamper_.end())
            return body;
        fn = it->second;
    }
    return fn(std::move(body));
}

} // namespace onionbind::simnet
