#include "onionbind/onionid.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <mutex>
#include <thread>
#include <vector>

#include "onionbind/bytes.hpp"
#include "onionbind/errors.hpp"

namespace onionbind::onionid {

namespace {

constexpr std::string_view kDerivationTag = "genuine-onion-v1";

bool in_alphabet(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '2' && c <= '7');
}

char lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Per-trial seed for the deterministic vanity mode: SHA-256 of a tag, the
// master seed, and the big-endian trial index.
crypto::Seed trial_seed(const crypto::Seed& master, std::uint64_t trial) {
    Bytes input;
    constexpr std::string_view tag = "onionbind-vanity-trial";
    input.insert(input.end(), tag.begin(), tag.end());
    input.insert(input.end(), master.begin(), master.end());
    for (int shift = 56; shift >= 0; shift -= 8)
        input.push_back(static_cast<std::uint8_t>(trial >> shift & 0xff));
    return crypto::sha256(input);
}

} // namespace

OnionAddress OnionAddress::parse(std::string_view text) {
    // Strip an optional ".onion" suffix, case-insensitively, then demand
    // exactly 16 alphabet characters. Error positions index into `text`.
    std::string_view label = text;
    if (text.size() >= kOnionSuffix.size()) {
        std::string_view tail = text.substr(text.size() - kOnionSuffix.size());
        bool suffixed = true;
        for (std::size_t i = 0; i < tail.size(); ++i)
            if (lower(tail[i]) != kOnionSuffix[i])
                suffixed = false;
        if (suffixed)
            label = text.substr(0, text.size() - kOnionSuffix.size());
    }
    std::string normalized;
    normalized.reserve(kLabelLength);
    for (std::size_t i = 0; i < label.size() && i < kLabelLength; ++i) {
        char c = lower(label[i]);
        if (!in_alphabet(c))
            throw Error(Errc::MalformedAddress, "character outside base32 alphabet")
                .with_position(i);
        normalized.push_back(c);
    }
    if (label.size() != kLabelLength)
        throw Error(Errc::MalformedAddress, "label is not 16 characters")
            .with_position(std::min(label.size(), kLabelLength));
    return OnionAddress(std::move(normalized));
}

ServiceIdentity generate_identity() {
    ServiceIdentity id;
    crypto::generate_keypair(id.public_key, id.secret_key);
    return id;
}

ServiceIdentity generate_identity(ByteView seed) {
    if (seed.size() != crypto::kSeedLen)
        throw Error(Errc::InvalidSeed, "seed must be exactly 32 bytes");
    crypto::Seed s;
    std::memcpy(s.data(), seed.data(), s.size());
    ServiceIdentity id;
    crypto::generate_keypair(id.public_key, id.secret_key, s);
    return id;
}

OnionAddress derive_onion_address(const crypto::PublicKey& public_key) {
    Bytes input;
    input.reserve(kDerivationTag.size() + public_key.size());
    input.insert(input.end(), kDerivationTag.begin(), kDerivationTag.end());
    input.insert(input.end(), public_key.begin(), public_key.end());
    crypto::Digest digest = crypto::sha256(input);
    // First 80 bits of the digest, 16 base32 characters exactly.
    std::string label = base32_encode(ByteView{digest.data(), 10});
    return OnionAddress::parse(label);
}

OnionAddress derive_onion_address(ByteView public_key) {
    if (public_key.size() != crypto::kPublicKeyLen)
        throw Error(Errc::InvalidKey, "public key must be exactly 32 bytes");
    crypto::PublicKey pk;
    std::memcpy(pk.data(), public_key.data(), pk.size());
    return derive_onion_address(pk);
}

OnionAddress validate_onion_address(std::string_view text) {
    return OnionAddress::parse(text);
}

VanityResult vanity_search(std::string_view prefix, std::uint64_t max_trials,
                           std::optional<crypto::Seed> seed, unsigned jobs) {
    if (prefix.empty())
        throw Error(Errc::InvalidPrefix, "prefix must not be empty");
    if (prefix.size() > 8)
        throw Error(Errc::InvalidPrefix, "prefix longer than 8 characters");
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (!in_alphabet(prefix[i]))
            throw Error(Errc::InvalidPrefix, "character outside base32 alphabet").with_position(i);
    if (max_trials == 0)
        throw Error(Errc::SearchExhausted, "no trials allowed").with_trials(0);

    auto attempt = [&](std::uint64_t trial) -> std::optional<ServiceIdentity> {
        ServiceIdentity id;
        if (seed) {
            crypto::Seed s = trial_seed(*seed, trial);
            crypto::generate_keypair(id.public_key, id.secret_key, s);
        } else {
            crypto::generate_keypair(id.public_key, id.secret_key);
        }
        if (derive_onion_address(id.public_key).label().starts_with(prefix))
            return id;
        return std::nullopt;
    };

    if (jobs <= 1) {
        for (std::uint64_t trial = 0; trial < max_trials; ++trial) {
            if (auto found = attempt(trial))
                return {*found, trial + 1};
        }
        throw Error(Errc::SearchExhausted, "no match within trial budget").with_trials(max_trials);
    }

    // Workers claim trial indices from a shared counter; the reported count is
    // the total number of trials actually evaluated across workers.
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> evaluated{0};
    std::atomic<bool> done{false};
    std::optional<ServiceIdentity> winner;
    std::mutex winner_mu;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            while (!done.load(std::memory_order_relaxed)) {
                std::uint64_t trial = next.fetch_add(1, std::memory_order_relaxed);
                if (trial >= max_trials)
                    return;
                auto found = attempt(trial);
                evaluated.fetch_add(1, std::memory_order_relaxed);
                if (found) {
                    std::lock_guard lock(winner_mu);
                    if (!winner)
                        winner = found;
                    done.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (auto& t : workers)
        t.join();
    if (!winner)
        throw Error(Errc::SearchExhausted, "no match within trial budget")
            .with_trials(evaluated.load());
    return {*winner, evaluated.load()};
}

} // namespace onionbind::onionid
