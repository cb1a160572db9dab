#include "onionbind/descriptor.hpp"

#include <algorithm>
#include <cstring>
#include <map>

#include "onionbind/errors.hpp"
#include "onionbind/url.hpp"

namespace onionbind::descriptor {

namespace {

bool is_hex64(std::string_view s) {
    if (s.size() != 64)
        return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

void append_line(Bytes& out, std::string_view name, std::string_view value) {
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(':');
    out.push_back(' ');
    out.insert(out.end(), value.begin(), value.end());
    out.push_back('\n');
}

const std::string kPlaceholderFingerprint(64, '0');

} // namespace

BindingDescriptor build_descriptor(const std::string& clearnet_url,
                                   const onionid::OnionAddress& onion_address,
                                   TimePoint issued_at,
                                   std::chrono::seconds lifetime,
                                   std::optional<std::string> tls_fingerprint) {
    Url::parse(clearnet_url); // throws Errc::InvalidUrl
    if (lifetime.count() <= 0)
        throw Error(Errc::InvalidLifetime, "lifetime must be positive");
    if (tls_fingerprint && !is_hex64(*tls_fingerprint))
        throw Error(Errc::InvalidFieldValue, "tls fingerprint must be 64 lowercase hex chars");
    BindingDescriptor d{
        .version = 1,
        .clearnet_url = clearnet_url,
        .onion_address = onion_address,
        .issued_at = issued_at,
        .expires_at = issued_at + lifetime,
        .signer_fingerprint = kPlaceholderFingerprint,
        .tls_fingerprint = std::move(tls_fingerprint),
    };
    return d;
}

Bytes canonical_encode(const BindingDescriptor& d) {
    Bytes out;
    out.reserve(256);
    append_line(out, "onion-binding-version", std::to_string(d.version));
    append_line(out, "clearnet", d.clearnet_url);
    append_line(out, "onion", d.onion_address.to_string());
    append_line(out, "issued", format_rfc3339(d.issued_at));
    append_line(out, "expires", format_rfc3339(d.expires_at));
    append_line(out, "signer", d.signer_fingerprint);
    if (d.tls_fingerprint)
        append_line(out, "tls-fingerprint", *d.tls_fingerprint);
    return out;
}

SignedBindingDescriptor sign_descriptor(BindingDescriptor d, const onionid::ServiceIdentity& signer) {
    d.signer_fingerprint = crypto::fingerprint_hex(signer.public_key);
    Bytes payload = canonical_encode(d);
    Bytes sig = crypto::sign_detached(payload, signer.secret_key);
    return SignedBindingDescriptor{
        .descriptor = std::move(d),
        .payload = std::move(payload),
        .signature = std::move(sig),
        .signer_public_key = signer.public_key,
    };
}

std::string_view verify_status_name(VerifyStatus s) {
    switch (s) {
    case VerifyStatus::Accept: return "Accept";
    case VerifyStatus::BadSignature: return "BadSignature";
    case VerifyStatus::FingerprintMismatch: return "FingerprintMismatch";
    }
    return "?";
}

VerifyStatus verify_signature(const SignedBindingDescriptor& signed_desc) {
    if (!crypto::verify_detached(signed_desc.payload, signed_desc.signature,
                                 signed_desc.signer_public_key))
        return VerifyStatus::BadSignature;
    if (crypto::fingerprint_hex(signed_desc.signer_public_key) !=
        signed_desc.descriptor.signer_fingerprint)
        return VerifyStatus::FingerprintMismatch;
    return VerifyStatus::Accept;
}

std::string armor(const SignedBindingDescriptor& signed_desc) {
    // The signature line carries the signer public key followed by the
    // detached signature, so a block is verifiable on its own.
    Bytes key_and_sig;
    key_and_sig.reserve(crypto::kPublicKeyLen + signed_desc.signature.size());
    key_and_sig.insert(key_and_sig.end(), signed_desc.signer_public_key.begin(),
                       signed_desc.signer_public_key.end());
    key_and_sig.insert(key_and_sig.end(), signed_desc.signature.begin(),
                       signed_desc.signature.end());
    std::string out;
    out.append(kBeginMarker);
    out.push_back('\n');
    out.append(reinterpret_cast<const char*>(signed_desc.payload.data()),
               signed_desc.payload.size());
    out.append("signature: ");
    out.append(base64_encode(key_and_sig));
    out.push_back('\n');
    out.append(kEndMarker);
    out.push_back('\n');
    return out;
}

SignedBindingDescriptor parse_armored(std::string_view text) {
    // Normalize transport artifacts first: CRLF to LF, whitespace around the
    // block. Signatures are always checked against the LF payload bytes.
    std::string normalized;
    normalized.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
            continue;
        normalized.push_back(text[i]);
    }
    std::size_t begin = normalized.find_first_not_of(" \t\n");
    std::size_t end = normalized.find_last_not_of(" \t\n");
    if (begin == std::string::npos)
        throw Error(Errc::MissingMarkers, "empty input");
    std::string_view body{normalized.data() + begin, end - begin + 1};

    if (!body.starts_with(kBeginMarker))
        throw Error(Errc::MissingMarkers, "BEGIN marker not found");
    if (!body.ends_with(kEndMarker))
        throw Error(Errc::MissingMarkers, "END marker not found");
    body.remove_prefix(kBeginMarker.size());
    body.remove_suffix(kEndMarker.size());
    if (body.empty() || body.front() != '\n' || body.back() != '\n')
        throw Error(Errc::MissingMarkers, "markers must sit on their own lines");
    body.remove_prefix(1);

    std::map<std::string, std::string, std::less<>> fields;
    Bytes payload;
    while (!body.empty()) {
        std::size_t nl = body.find('\n');
        std::string_view line = body.substr(0, nl);
        body.remove_prefix(nl + 1);
        std::size_t sep = line.find(": ");
        if (sep == std::string_view::npos)
            throw Error(Errc::UnknownField, "line is not 'name: value': " + std::string(line));
        std::string name{line.substr(0, sep)};
        std::string value{line.substr(sep + 2)};
        static constexpr std::string_view known[] = {
            "onion-binding-version", "clearnet", "onion", "issued",
            "expires", "signer", "tls-fingerprint", "signature",
        };
        if (std::find(std::begin(known), std::end(known), name) == std::end(known))
            throw Error(Errc::UnknownField, name);
        if (fields.contains(name))
            throw Error(Errc::DuplicateField, name);
        fields.emplace(name, std::move(value));
        if (name != "signature") {
            // Payload bytes are kept exactly as received; the signature is
            // over these, not over a re-encoding of the parsed fields.
            payload.insert(payload.end(), line.begin(), line.end());
            payload.push_back('\n');
        }
    }

    for (std::string_view required :
         {"onion-binding-version", "clearnet", "onion", "issued", "expires", "signer",
          "signature"}) {
        if (!fields.contains(required))
            throw Error(Errc::MissingField, std::string(required));
    }

    if (fields["onion-binding-version"] != "1")
        throw Error(Errc::InvalidFieldValue,
                    "unsupported version: " + fields["onion-binding-version"]);
    Url::parse(fields["clearnet"]);
    onionid::OnionAddress onion = onionid::OnionAddress::parse(fields["onion"]);
    TimePoint issued = parse_rfc3339(fields["issued"]);
    TimePoint expires = parse_rfc3339(fields["expires"]);
    if (!(issued < expires))
        throw Error(Errc::InvalidFieldValue, "issued must precede expires");
    if (!is_hex64(fields["signer"]))
        throw Error(Errc::InvalidFieldValue, "signer must be 64 lowercase hex chars");
    std::optional<std::string> tls;
    if (fields.contains("tls-fingerprint")) {
        if (!is_hex64(fields["tls-fingerprint"]))
            throw Error(Errc::InvalidFieldValue, "tls fingerprint must be 64 lowercase hex chars");
        tls = fields["tls-fingerprint"];
    }

    Bytes key_and_sig = base64_decode(fields["signature"]);
    if (key_and_sig.size() < crypto::kPublicKeyLen)
        throw Error(Errc::InvalidFieldValue, "signature field too short to hold a public key");
    SignedBindingDescriptor out{
        .descriptor =
            BindingDescriptor{
                .version = 1,
                .clearnet_url = fields["clearnet"],
                .onion_address = std::move(onion),
                .issued_at = issued,
                .expires_at = expires,
                .signer_fingerprint = fields["signer"],
                .tls_fingerprint = std::move(tls),
            },
        .payload = std::move(payload),
        .signature = Bytes(key_and_sig.begin() + crypto::kPublicKeyLen, key_and_sig.end()),
        .signer_public_key = {},
    };
    std::memcpy(out.signer_public_key.data(), key_and_sig.data(), crypto::kPublicKeyLen);
    return out;
}

} // namespace onionbind::descriptor
