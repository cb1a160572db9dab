#include "onionbind/errors.hpp"

namespace onionbind {

std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::InvalidSeed: return "InvalidSeed";
    case Errc::InvalidKey: return "InvalidKey";
    case Errc::MalformedAddress: return "MalformedAddress";
    case Errc::InvalidPrefix: return "InvalidPrefix";
    case Errc::SearchExhausted: return "SearchExhausted";
    case Errc::InvalidUrl: return "InvalidUrl";
    case Errc::InvalidLifetime: return "InvalidLifetime";
    case Errc::InvalidTimestamp: return "InvalidTimestamp";
    case Errc::InvalidFieldValue: return "InvalidFieldValue";
    case Errc::MissingMarkers: return "MissingMarkers";
    case Errc::UnknownField: return "UnknownField";
    case Errc::DuplicateField: return "DuplicateField";
    case Errc::MissingField: return "MissingField";
    case Errc::BadBase64: return "BadBase64";
    case Errc::BadHex: return "BadHex";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::BadCertSignature: return "BadCertSignature";
    case Errc::StoreCorrupt: return "StoreCorrupt";
    case Errc::AddressKeyMismatch: return "AddressKeyMismatch";
    case Errc::NotFound: return "NotFound";
    case Errc::ChannelMismatch: return "ChannelMismatch";
    case Errc::DirectorySelfAuthFailure: return "DirectorySelfAuthFailure";
    case Errc::InvalidThreshold: return "InvalidThreshold";
    case Errc::LogCorrupt: return "LogCorrupt";
    case Errc::IoError: return "IoError";
    case Errc::UsageError: return "UsageError";
    }
    return "UnknownError";
}

namespace {
std::string make_what(Errc code, const std::string& detail) {
    std::string s{errc_name(code)};
    if (!detail.empty()) {
        s += ": ";
        s += detail;
    }
    return s;
}
} // namespace

Error::Error(Errc code, std::string detail)
    : std::runtime_error(make_what(code, detail)), code_(code) {}

} // namespace onionbind
