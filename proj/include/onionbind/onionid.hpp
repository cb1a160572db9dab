#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "onionbind/crypto.hpp"

namespace onionbind::onionid {

inline constexpr std::string_view kAddressAlphabet = "abcdefghijklmnopqrstuvwxyz234567";
inline constexpr std::size_t kLabelLength = 16;
inline constexpr std::string_view kOnionSuffix = ".onion";

// The service keypair. Its public half determines the onion address.
struct ServiceIdentity {
    crypto::PublicKey public_key{};
    crypto::SecretKey secret_key{};
};

// A validated 16-character base32 label. Printed form is always "<label>.onion".
class OnionAddress {
public:
    // Accepts "<label>.onion" or a bare label, case-insensitively, and
    // normalizes to lowercase. Throws Errc::MalformedAddress with the position
    // of the first offending character.
    static OnionAddress parse(std::string_view text);

    const std::string& label() const noexcept { return label_; }
    std::string to_string() const { return label_ + std::string(kOnionSuffix); }

    friend auto operator<=>(const OnionAddress&, const OnionAddress&) = default;

private:
    explicit OnionAddress(std::string label) : label_(std::move(label)) {}
    std::string label_;
};

ServiceIdentity generate_identity();
ServiceIdentity generate_identity(ByteView seed); // exactly 32 bytes, else Errc::InvalidSeed

// The address is the unpadded lowercase base32 encoding of the first 80 bits
// of SHA-256("genuine-onion-v1" || public_key). Not interoperable with real
// Tor addresses of any version.
OnionAddress derive_onion_address(const crypto::PublicKey& public_key);
OnionAddress derive_onion_address(ByteView public_key); // length-checked, Errc::InvalidKey

OnionAddress validate_onion_address(std::string_view text);

struct VanityResult {
    ServiceIdentity identity;
    std::uint64_t trials = 0;
};

// Generates fresh keypairs until the derived address starts with `prefix`.
// Deterministic for a fixed seed when jobs == 1. Throws Errc::InvalidPrefix or
// Errc::SearchExhausted (carrying the trial count).
VanityResult vanity_search(std::string_view prefix, std::uint64_t max_trials,
                           std::optional<crypto::Seed> seed = std::nullopt,
                           unsigned jobs = 1);

} // namespace onionbind::onionid
