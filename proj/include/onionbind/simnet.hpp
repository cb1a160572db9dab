#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include "onionbind/crypto.hpp"
#include "onionbind/onionid.hpp"
#include "onionbind/url.hpp"

namespace onionbind::simnet {

// OnionCircuit reaches only .onion hosts, Direct only clearnet hosts, and
// Tor2webProxy only "<label>.tor2web.example" gateway hosts.
enum class Channel { OnionCircuit, Direct, Tor2webProxy };

std::string_view channel_name(Channel c);

struct Document {
    std::string body;
    Channel fetched_over;
    // Present iff fetched over OnionCircuit: the directory key the circuit
    // authenticated against the address.
    std::optional<crypto::PublicKey> authenticated_service_key;
};

// Transport abstraction shared by the in-memory network and the loopback HTTP
// client, so the verifier runs unchanged against either.
class Network {
public:
    virtual ~Network() = default;
    // Throws Errc::NotFound, Errc::ChannelMismatch, Errc::DirectorySelfAuthFailure.
    virtual Document fetch(const Url& url, Channel channel) = 0;
};

using TamperFn = std::function<std::string(std::string)>;

struct DirectoryOverride {
    onionid::OnionAddress address;
    crypto::PublicKey key;
};
struct TamperInTransit {
    std::string host;
    TamperFn transform;
};
struct RemoveDocument {
    std::string host;
    std::string path;
};
using AdversaryHook = std::variant<DirectoryOverride, TamperInTransit, RemoveDocument>;

/* Deterministic in-memory network: hosted documents keyed by (host, path), a
 * directory mapping onion labels to service keys, and adversary hooks.
 *
 * Tamper hooks apply to Direct and Tor2webProxy fetches only; tampering inside
 * an onion circuit is modeled solely via directory override. An onion-circuit
 * fetch re-derives the address from the directory key and fails closed on
 * mismatch.
 */
class SimNetwork final : public Network {
public:
    void register_site(const std::string& clearnet_host, const std::string& path, std::string body);
    // Requires derive_onion_address(identity.public_key) == address, else
    // Errc::AddressKeyMismatch. Also installs the directory entry.
    void register_site(const onionid::OnionAddress& address, const std::string& path,
                       std::string body, const onionid::ServiceIdentity& identity);

    Document fetch(const Url& url, Channel channel) override;

    crypto::PublicKey lookup_service_key(const onionid::OnionAddress& address) const; // Errc::NotFound

    void install_adversary(AdversaryHook hook);

    // Raw accessors for the loopback HTTP frontend, which performs the
    // client-side self-auth check itself.
    std::optional<std::string> raw_document(const std::string& host, const std::string& path) const;
    std::optional<crypto::PublicKey> raw_directory_entry(const std::string& label) const;
    std::string apply_tamper(const std::string& host, std::string body) const;

private:
    mutable std::mutex mu_;
    std::map<std::pair<std::string, std::string>, std::string> documents_;
    std::map<std::string, crypto::PublicKey> directory_; // label -> key
    std::map<std::string, TamperFn> tamper_;             // host -> hook
};

} // namespace onionbind::simnet
