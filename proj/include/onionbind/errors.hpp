#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace onionbind {

enum class Errc {
    // key and address handling
    InvalidSeed,
    InvalidKey,
    MalformedAddress,
    InvalidPrefix,
    SearchExhausted,
    // descriptor construction and wire format
    InvalidUrl,
    InvalidLifetime,
    InvalidTimestamp,
    InvalidFieldValue,
    MissingMarkers,
    UnknownField,
    DuplicateField,
    MissingField,
    BadBase64,
    BadHex,
    // trust store
    UnknownKey,
    BadCertSignature,
    StoreCorrupt,
    // simulated network
    AddressKeyMismatch,
    NotFound,
    ChannelMismatch,
    DirectorySelfAuthFailure,
    // notary
    InvalidThreshold,
    LogCorrupt,
    // misc
    IoError,
    UsageError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    explicit Error(Errc code, std::string detail = "");

    Errc code() const noexcept { return code_; }

    // Position of the first offending character, where the operation defines one
    // (address and wire-format parsing).
    std::optional<std::size_t> position() const noexcept { return position_; }

    // Number of trials consumed before giving up (vanity search).
    std::optional<std::uint64_t> trials() const noexcept { return trials_; }

    Error& with_position(std::size_t pos) {
        position_ = pos;
        return *this;
    }

    Error& with_trials(std::uint64_t n) {
        trials_ = n;
        return *this;
    }

private:
    Errc code_;
    std::optional<std::size_t> position_;
    std::optional<std::uint64_t> trials_;
};

} // namespace onionbind
