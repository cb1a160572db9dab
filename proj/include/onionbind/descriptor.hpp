#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "onionbind/bytes.hpp"
#include "onionbind/crypto.hpp"
#include "onionbind/onionid.hpp"
#include "onionbind/timeutil.hpp"

namespace onionbind::descriptor {

inline constexpr std::string_view kWellKnownPath = "/.well-known/onion-binding.txt";
inline constexpr std::string_view kBeginMarker = "-----BEGIN ONION BINDING-----";
inline constexpr std::string_view kEndMarker = "-----END ONION BINDING-----";
inline constexpr std::chrono::seconds kDefaultLifetime = std::chrono::seconds{90LL * 24 * 60 * 60};

// The signed statement pairing a clearnet URL with an onion address.
struct BindingDescriptor {
    int version = 1;
    std::string clearnet_url;
    onionid::OnionAddress onion_address;
    TimePoint issued_at{};
    TimePoint expires_at{};
    std::string signer_fingerprint;              // 64 hex; all '0' until signed
    std::optional<std::string> tls_fingerprint;  // 64 hex when present

    friend bool operator==(const BindingDescriptor&, const BindingDescriptor&) = default;
};

// `payload` holds the exact bytes the signature covers. For locally signed
// descriptors that is canonical_encode(descriptor); for parsed wire blocks it
// is the payload as received, so any textual tampering of the block fails
// verification even when the parsed fields normalize back to the original.
struct SignedBindingDescriptor {
    BindingDescriptor descriptor;
    Bytes payload;
    Bytes signature;
    crypto::PublicKey signer_public_key{};
};

BindingDescriptor build_descriptor(const std::string& clearnet_url,
                                   const onionid::OnionAddress& onion_address,
                                   TimePoint issued_at,
                                   std::chrono::seconds lifetime,
                                   std::optional<std::string> tls_fingerprint = std::nullopt);

/* Canonical encoding, one field per LF-terminated line, fixed order, one
 * space after the colon, tls-fingerprint line omitted when absent:
 *
 *   onion-binding-version: 1
 *   clearnet: <url>
 *   onion: <label>.onion
 *   issued: <RFC 3339 UTC>
 *   expires: <RFC 3339 UTC>
 *   signer: <64 hex>
 *   tls-fingerprint: <64 hex>
 */
Bytes canonical_encode(const BindingDescriptor& d);

SignedBindingDescriptor sign_descriptor(BindingDescriptor d, const onionid::ServiceIdentity& signer);

enum class VerifyStatus { Accept, BadSignature, FingerprintMismatch };
std::string_view verify_status_name(VerifyStatus s);

// Accept iff the signature verifies over the payload bytes and the signer
// fingerprint inside the signed payload matches the digest of the public key
// that verified it.
VerifyStatus verify_signature(const SignedBindingDescriptor& signed_desc);

/* Armored wire form, LF line endings, published at /.well-known/onion-binding.txt
 * on both sites:
 *
 *   -----BEGIN ONION BINDING-----
 *   <canonical payload lines>
 *   signature: <base64 of signature bytes>
 *   -----END ONION BINDING-----
 */
std::string armor(const SignedBindingDescriptor& signed_desc);

// Tolerates surrounding whitespace and CRLF transport (normalized to LF before
// anything else). Signatures are always checked against the LF bytes, so a
// block whose signature was produced over CRLF payload will not verify.
SignedBindingDescriptor parse_armored(std::string_view text);

} // namespace onionbind::descriptor
