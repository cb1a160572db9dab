#include "onionbind/verifier.hpp"

#include <json.hpp>

#include "onionbind/errors.hpp"
#include "onionbind/url.hpp"

namespace onionbind::verifier {

namespace {

using descriptor::SignedBindingDescriptor;
using simnet::Channel;
using simnet::Document;

std::string_view check_fail_detail(const Error& e) {
    return e.what();
}

// Fetch failures map to verdicts: a failed directory self-auth is the
// address/key mismatch the scheme exists to catch, everything else means the
// descriptor is simply not retrievable.
VerdictKind fetch_error_verdict(const Error& e) {
    if (e.code() == Errc::DirectorySelfAuthFailure)
        return VerdictKind::AddressKeyMismatch;
    return VerdictKind::Missing;
}

struct EntryPoint {
    bool is_onion = false;
    std::string clearnet_url;                           // when clearnet
    std::optional<onionid::OnionAddress> onion_address; // when onion
    std::optional<Channel> forced_channel;              // gateway URLs force tor2web
};

EntryPoint classify_entry(const std::string& entry) {
    EntryPoint ep;
    if (entry.find("://") == std::string::npos) {
        ep.is_onion = true;
        ep.onion_address = onionid::OnionAddress::parse(entry);
        return ep;
    }
    Url url = Url::parse(entry);
    if (is_onion_host(url.host)) {
        ep.is_onion = true;
        ep.onion_address = onionid::OnionAddress::parse(url.host);
    } else if (is_tor2web_host(url.host)) {
        ep.is_onion = true;
        ep.onion_address = onionid::OnionAddress::parse(tor2web_label(url.host));
        ep.forced_channel = Channel::Tor2webProxy;
    } else {
        ep.is_onion = false;
        ep.clearnet_url = entry;
    }
    return ep;
}

Url onion_well_known(const onionid::OnionAddress& address, Channel channel) {
    std::string path{descriptor::kWellKnownPath};
    if (channel == Channel::Tor2webProxy)
        return Url::parse("https://" + address.label() + std::string(kTor2webSuffix) + path);
    return Url::parse("http://" + address.to_string() + path);
}

Url clearnet_well_known(const std::string& clearnet_url) {
    Url url = Url::parse(clearnet_url);
    url.path = std::string(descriptor::kWellKnownPath);
    return url;
}

} // namespace

std::string_view verdict_name(VerdictKind v) {
    switch (v) {
    case VerdictKind::Authentic: return "Authentic";
    case VerdictKind::SelfConsistentUntrusted: return "SelfConsistentUntrusted";
    case VerdictKind::ChannelDowngraded: return "ChannelDowngraded";
    case VerdictKind::Mismatch: return "Mismatch";
    case VerdictKind::BadSignature: return "BadSignature";
    case VerdictKind::AddressKeyMismatch: return "AddressKeyMismatch";
    case VerdictKind::Expired: return "Expired";
    case VerdictKind::Missing: return "Missing";
    }
    return "?";
}

std::string_view assurance_name(Assurance a) {
    return a == Assurance::Full ? "Full" : "Downgraded";
}

int verdict_exit_code(VerdictKind v) {
    switch (v) {
    case VerdictKind::Authentic: return 0;
    case VerdictKind::SelfConsistentUntrusted: return 3;
    case VerdictKind::ChannelDowngraded: return 4;
    case VerdictKind::Mismatch: return 5;
    case VerdictKind::BadSignature: return 6;
    case VerdictKind::AddressKeyMismatch: return 7;
    case VerdictKind::Expired: return 8;
    case VerdictKind::Missing: return 9;
    }
    return 9;
}

Assurance assess_channel(Channel onion_channel) {
    return onion_channel == Channel::OnionCircuit ? Assurance::Full : Assurance::Downgraded;
}

VerificationReport verify_pair(simnet::Network& net, const trust::TrustStore& store,
                               const std::string& entry_point, TimePoint now,
                               const VerifyOptions& options) {
    VerificationReport report;
    report.checked_at = now;
    report.assurance = Assurance::Full;

    auto pass = [&](std::string check, std::string detail) {
        report.evidence.push_back({std::move(check), true, std::move(detail)});
    };
    auto fail = [&](std::string check, std::string detail, VerdictKind verdict) {
        report.evidence.push_back({std::move(check), false, std::move(detail)});
        report.verdict = verdict;
    };

    EntryPoint entry;
    try {
        entry = classify_entry(entry_point);
    } catch (const Error& e) {
        fail("FetchEntry", std::string("unusable entry point: ") + e.what(), VerdictKind::Missing);
        return report;
    }
    Channel onion_channel = entry.forced_channel.value_or(options.onion_channel);
    if (entry.is_onion)
        report.onion_address = entry.onion_address->to_string();
    else
        report.clearnet_url = entry.clearnet_url;

    // (1) fetch the well-known descriptor from the entry point
    Document entry_doc;
    try {
        Url url = entry.is_onion ? onion_well_known(*entry.onion_address, onion_channel)
                                 : clearnet_well_known(entry.clearnet_url);
        entry_doc = net.fetch(url, entry.is_onion ? onion_channel : Channel::Direct);
        pass("FetchEntry", url.to_string());
    } catch (const Error& e) {
        fail("FetchEntry", std::string(check_fail_detail(e)), fetch_error_verdict(e));
        return report;
    }

    // (2) parse it
    std::optional<SignedBindingDescriptor> entry_parsed;
    try {
        entry_parsed = descriptor::parse_armored(entry_doc.body);
        pass("ParseEntry", "well-formed binding descriptor");
    } catch (const Error& e) {
        fail("ParseEntry", std::string(check_fail_detail(e)), VerdictKind::Missing);
        return report;
    }
    const SignedBindingDescriptor& entry_desc = *entry_parsed;
    report.clearnet_url = entry_desc.descriptor.clearnet_url;
    report.onion_address = entry_desc.descriptor.onion_address.to_string();
    report.signer_fingerprint = entry_desc.descriptor.signer_fingerprint;

    // (3) fetch the counterpart the descriptor names
    Document counter_doc;
    try {
        Url url = entry.is_onion
                      ? clearnet_well_known(entry_desc.descriptor.clearnet_url)
                      : onion_well_known(entry_desc.descriptor.onion_address, onion_channel);
        counter_doc = net.fetch(url, entry.is_onion ? Channel::Direct : onion_channel);
        pass("FetchCounterpart", url.to_string());
    } catch (const Error& e) {
        fail("FetchCounterpart", std::string(check_fail_detail(e)), fetch_error_verdict(e));
        return report;
    }

    std::optional<SignedBindingDescriptor> counter_parsed;
    try {
        counter_parsed = descriptor::parse_armored(counter_doc.body);
        pass("ParseCounterpart", "well-formed binding descriptor");
    } catch (const Error& e) {
        fail("ParseCounterpart", std::string(check_fail_detail(e)), VerdictKind::Missing);
        return report;
    }
    const SignedBindingDescriptor& counter_desc = *counter_parsed;

    // (4) both sides must publish the same signed statement, byte for byte
    if (entry_desc.payload != counter_desc.payload) {
        fail("CrossMatch", "canonical descriptors differ between the two sites",
             VerdictKind::Mismatch);
        return report;
    }
    pass("CrossMatch", "descriptors byte-identical");

    // (5) signature over the shared descriptor, from each side's block
    for (const auto* side : {&entry_desc, &counter_desc}) {
        descriptor::VerifyStatus status = descriptor::verify_signature(*side);
        if (status != descriptor::VerifyStatus::Accept) {
            fail("SignatureValid", std::string(descriptor::verify_status_name(status)),
                 VerdictKind::BadSignature);
            return report;
        }
    }
    pass("SignatureValid", "signature verifies and signer fingerprint matches key");

    // (6) self-authentication of the onion side against the descriptor
    const Document& onion_doc = entry.is_onion ? entry_doc : counter_doc;
    if (onion_doc.fetched_over == Channel::OnionCircuit) {
        if (!onion_doc.authenticated_service_key) {
            fail("SelfAuth", "onion circuit returned no service key",
                 VerdictKind::AddressKeyMismatch);
            return report;
        }
        onionid::OnionAddress derived =
            onionid::derive_onion_address(*onion_doc.authenticated_service_key);
        if (derived != entry_desc.descriptor.onion_address) {
            fail("SelfAuth",
                 "service key derives to " + derived.to_string() + ", descriptor names " +
                     entry_desc.descriptor.onion_address.to_string(),
                 VerdictKind::AddressKeyMismatch);
            return report;
        }
        pass("SelfAuth", "service key matches " + derived.to_string());
    } else {
        pass("SelfAuth", "not available over " +
                             std::string(simnet::channel_name(onion_doc.fetched_over)) +
                             "; channel assurance downgraded");
    }

    // (7) freshness, with bounded skew on the issue time
    const auto& d = entry_desc.descriptor;
    if (now + kIssuedSkew < d.issued_at) {
        fail("Freshness", "descriptor not yet valid (issued " + format_rfc3339(d.issued_at) + ")",
             VerdictKind::Expired);
        return report;
    }
    if (now >= d.expires_at) {
        fail("Freshness", "descriptor expired " + format_rfc3339(d.expires_at),
             VerdictKind::Expired);
        return report;
    }
    pass("Freshness", "valid " + format_rfc3339(d.issued_at) + " to " + format_rfc3339(d.expires_at));

    // (8) signer trust
    trust::Validity validity = store.key_validity(d.signer_fingerprint);
    report.evidence.push_back({"Trust", validity == trust::Validity::Valid,
                               std::string(trust::validity_name(validity))});

    report.assurance = assess_channel(onion_doc.fetched_over);
    report.evidence.push_back({"Channel", report.assurance == Assurance::Full,
                               std::string(simnet::channel_name(onion_doc.fetched_over))});

    report.shared_descriptor = d;
    if (report.assurance == Assurance::Downgraded)
        report.verdict = VerdictKind::ChannelDowngraded;
    else if (validity == trust::Validity::Valid)
        report.verdict = VerdictKind::Authentic;
    else
        report.verdict = VerdictKind::SelfConsistentUntrusted;
    return report;
}

std::string_view tls_binding_name(TlsBinding b) {
    switch (b) {
    case TlsBinding::Bound: return "Bound";
    case TlsBinding::NotBound: return "NotBound";
    case TlsBinding::NoClaim: return "NoClaim";
    }
    return "?";
}

TlsBinding verify_tls_binding(const VerificationReport& report,
                              std::string_view observed_tls_fingerprint) {
    if (!report.shared_descriptor || !report.shared_descriptor->tls_fingerprint)
        return TlsBinding::NoClaim;
    std::string observed;
    observed.reserve(observed_tls_fingerprint.size());
    for (char c : observed_tls_fingerprint)
        observed.push_back(c >= 'A' && c <= 'F' ? static_cast<char>(c - 'A' + 'a') : c);
    return observed == *report.shared_descriptor->tls_fingerprint ? TlsBinding::Bound
                                                                  : TlsBinding::NotBound;
}

std::string report_json(const VerificationReport& report) {
    nlohmann::json evidence = nlohmann::json::array();
    for (const auto& check : report.evidence)
        evidence.push_back({{"check", check.check}, {"pass", check.pass}, {"detail", check.detail}});
    nlohmann::json j{
        {"verdict", verdict_name(report.verdict)},
        {"pair",
         {{"clearnet_url", report.clearnet_url}, {"onion_address", report.onion_address}}},
        {"signer_fingerprint", report.signer_fingerprint},
        {"assurance", assurance_name(report.assurance)},
        {"evidence", std::move(evidence)},
        {"checked_at", format_rfc3339(report.checked_at)},
    };
    return j.dump();
}

} // namespace onionbind::verifier
