#pragma once

#include <optional>
#include <string>
#include <vector>

#include "onionbind/descriptor.hpp"
#include "onionbind/simnet.hpp"
#include "onionbind/timeutil.hpp"
#include "onionbind/trust.hpp"

namespace onionbind::verifier {

enum class VerdictKind {
    Authentic,
    SelfConsistentUntrusted,
    ChannelDowngraded,
    Mismatch,
    BadSignature,
    AddressKeyMismatch,
    Expired,
    Missing,
};

enum class Assurance { Full, Downgraded };

std::string_view verdict_name(VerdictKind v);
std::string_view assurance_name(Assurance a);

// Exit code a CLI invocation reports for this verdict. 0 only for Authentic.
int verdict_exit_code(VerdictKind v);

struct CheckResult {
    std::string check;
    bool pass = false;
    std::string detail;
};

struct VerificationReport {
    VerdictKind verdict = VerdictKind::Missing;
    std::string clearnet_url;      // pair, as far as it is known
    std::string onion_address;     // "<label>.onion" or empty
    std::string signer_fingerprint;
    Assurance assurance = Assurance::Full;
    std::vector<CheckResult> evidence;
    TimePoint checked_at{};

    // The shared descriptor, when one was established. Not part of the wire
    // report; verify_tls_binding and the notary read it.
    std::optional<descriptor::BindingDescriptor> shared_descriptor;
};

struct VerifyOptions {
    // Channel used to reach onion content. Tor2webProxy rewrites onion URLs to
    // their "<label>.tor2web.example" gateway form.
    simnet::Channel onion_channel = simnet::Channel::OnionCircuit;
};

// Tolerated clock skew on issued_at.
inline constexpr std::chrono::seconds kIssuedSkew{5 * 60};

/* Runs the full cross-binding verification for one site pair, starting from a
 * clearnet URL or an onion address:
 *
 *   FetchEntry -> ParseEntry -> FetchCounterpart -> ParseCounterpart ->
 *   CrossMatch -> SignatureValid -> SelfAuth -> Freshness -> Trust
 *
 * The first failing check fixes the verdict; later checks are not executed and
 * the evidence lists exactly the checks that ran. If every check passes the
 * verdict is Authentic for a Valid signer over full-assurance channels,
 * SelfConsistentUntrusted for a signer the store does not vouch for, and
 * ChannelDowngraded when onion content did not travel an onion circuit.
 */
VerificationReport verify_pair(simnet::Network& net, const trust::TrustStore& store,
                               const std::string& entry_point, TimePoint now,
                               const VerifyOptions& options = {});

// Full assurance iff the onion content came over an onion circuit.
Assurance assess_channel(simnet::Channel onion_channel);

enum class TlsBinding { Bound, NotBound, NoClaim };
std::string_view tls_binding_name(TlsBinding b);

TlsBinding verify_tls_binding(const VerificationReport& report,
                              std::string_view observed_tls_fingerprint);

// One-line JSON object with exactly the report fields:
// assurance, checked_at, evidence, pair, signer_fingerprint, verdict.
std::string report_json(const VerificationReport& report);

} // namespace onionbind::verifier
