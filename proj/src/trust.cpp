#include "onionbind/trust.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "onionbind/errors.hpp"

namespace onionbind::trust {

namespace {

constexpr int kMaxChainDepth = 5;

// Certification message: the raw subject public key bytes.
ByteView cert_message(const crypto::PublicKey& subject) {
    return {subject.data(), subject.size()};
}

} // namespace

std::string_view owner_trust_name(OwnerTrust t) {
    switch (t) {
    case OwnerTrust::None: return "none";
    case OwnerTrust::Marginal: return "marginal";
    case OwnerTrust::Full: return "full";
    case OwnerTrust::Ultimate: return "ultimate";
    }
    return "?";
}

OwnerTrust owner_trust_from_name(std::string_view name) {
    if (name == "none") return OwnerTrust::None;
    if (name == "marginal") return OwnerTrust::Marginal;
    if (name == "full") return OwnerTrust::Full;
    if (name == "ultimate") return OwnerTrust::Ultimate;
    throw Error(Errc::InvalidFieldValue, "unknown trust level: " + std::string(name));
}

std::string_view validity_name(Validity v) {
    switch (v) {
    case Validity::Unknown: return "unknown";
    case Validity::MarginallyValid: return "marginal";
    case Validity::Valid: return "valid";
    }
    return "?";
}

std::string TrustStore::add_key(const crypto::PublicKey& public_key) {
    std::string fpr = crypto::fingerprint_hex(public_key);
    auto [it, inserted] = records_.try_emplace(fpr);
    if (inserted) {
        it->second.fingerprint = fpr;
        it->second.public_key = public_key;
        // Resolve certifications that were waiting for this certifier's key.
        // Forged ones are dropped: they can never contribute to validity.
        for (auto& [subject_fpr, record] : records_) {
            auto& certs = record.certifications;
            for (auto c = certs.begin(); c != certs.end();) {
                if (!c->verified && c->certifier_fingerprint == fpr) {
                    if (crypto::verify_detached(cert_message(record.public_key), c->signature,
                                                public_key)) {
                        c->verified = true;
                        ++c;
                    } else {
                        c = certs.erase(c);
                    }
                } else {
                    ++c;
                }
            }
        }
    }
    return fpr;
}

void TrustStore::remove_key(const std::string& fingerprint) {
    if (records_.erase(fingerprint) == 0)
        throw Error(Errc::UnknownKey, fingerprint);
}

void TrustStore::set_owner_trust(const std::string& fingerprint, OwnerTrust level) {
    auto it = records_.find(fingerprint);
    if (it == records_.end())
        throw Error(Errc::UnknownKey, fingerprint);
    it->second.owner_trust = level;
}

OwnerTrust TrustStore::owner_trust(const std::string& fingerprint) const {
    auto it = records_.find(fingerprint);
    if (it == records_.end())
        throw Error(Errc::UnknownKey, fingerprint);
    return it->second.owner_trust;
}

void TrustStore::certify(const onionid::ServiceIdentity& certifier,
                         const std::string& subject_fingerprint) {
    std::string certifier_fpr = crypto::fingerprint_hex(certifier.public_key);
    if (!records_.contains(certifier_fpr))
        throw Error(Errc::UnknownKey, "certifier not in store: " + certifier_fpr);
    auto it = records_.find(subject_fingerprint);
    if (it == records_.end())
        throw Error(Errc::UnknownKey, "subject not in store: " + subject_fingerprint);
    Bytes sig = crypto::sign_detached(cert_message(it->second.public_key), certifier.secret_key);
    import_certification(certifier_fpr, subject_fingerprint, sig);
}

void TrustStore::import_certification(const std::string& certifier_fingerprint,
                                      const std::string& subject_fingerprint,
                                      ByteView signature) {
    auto it = records_.find(subject_fingerprint);
    if (it == records_.end())
        throw Error(Errc::UnknownKey, "subject not in store: " + subject_fingerprint);
    auto& certs = it->second.certifications;
    auto existing = std::find_if(certs.begin(), certs.end(), [&](const Certification& c) {
        return c.certifier_fingerprint == certifier_fingerprint;
    });
    bool known = records_.contains(certifier_fingerprint);
    bool verified = false;
    if (known) {
        const auto& certifier_key = records_.at(certifier_fingerprint).public_key;
        if (!crypto::verify_detached(cert_message(it->second.public_key), signature,
                                     certifier_key))
            throw Error(Errc::BadCertSignature,
                        "certification by " + certifier_fingerprint + " does not verify");
        verified = true;
    }
    Certification cert{certifier_fingerprint, Bytes(signature.begin(), signature.end()), verified};
    if (existing != certs.end())
        *existing = std::move(cert);
    else
        certs.push_back(std::move(cert));
}

Validity TrustStore::key_validity(const std::string& fingerprint) const {
    auto target = records_.find(fingerprint);
    if (target == records_.end())
        return Validity::Unknown;

    // Valid keys and the round in which they became valid. Ultimate keys are
    // the roots at depth 0; each certification hop adds one, capped at 5, so
    // only keys valid at depth <= 4 can introduce others.
    std::map<std::string, int> valid_depth;
    for (const auto& [fpr, record] : records_)
        if (record.owner_trust == OwnerTrust::Ultimate)
            valid_depth.emplace(fpr, 0);

    for (int round = 1; round <= kMaxChainDepth; ++round) {
        bool changed = false;
        for (const auto& [fpr, record] : records_) {
            if (valid_depth.contains(fpr))
                continue;
            int full = 0;
            int marginal = 0;
            for (const auto& cert : record.certifications) {
                if (!cert.verified || cert.certifier_fingerprint == fpr)
                    continue;
                auto depth = valid_depth.find(cert.certifier_fingerprint);
                if (depth == valid_depth.end() || depth->second >= round ||
                    depth->second > kMaxChainDepth - 1)
                    continue;
                OwnerTrust ot = records_.at(cert.certifier_fingerprint).owner_trust;
                if (ot == OwnerTrust::Full || ot == OwnerTrust::Ultimate)
                    ++full;
                else if (ot == OwnerTrust::Marginal)
                    ++marginal;
            }
            if (full >= 1 || marginal >= 3) {
                valid_depth.emplace(fpr, round);
                changed = true;
            }
        }
        if (!changed)
            break;
    }

    if (valid_depth.contains(fingerprint))
        return Validity::Valid;

    int marginal = 0;
    for (const auto& cert : target->second.certifications) {
        if (!cert.verified || cert.certifier_fingerprint == fingerprint)
            continue;
        auto depth = valid_depth.find(cert.certifier_fingerprint);
        if (depth == valid_depth.end() || depth->second > kMaxChainDepth - 1)
            continue;
        if (records_.at(cert.certifier_fingerprint).owner_trust == OwnerTrust::Marginal)
            ++marginal;
    }
    return marginal >= 1 ? Validity::MarginallyValid : Validity::Unknown;
}

const KeyRecord* TrustStore::find(const std::string& fingerprint) const {
    auto it = records_.find(fingerprint);
    return it == records_.end() ? nullptr : &it->second;
}

void TrustStore::save(const std::filesystem::path& file) const {
    std::ostringstream out;
    out << "onion-trust-store-version: 1\n";
    for (const auto& [fpr, record] : records_) {
        out << "key: " << fpr << ' ' << to_hex({record.public_key.data(), record.public_key.size()})
            << ' ' << owner_trust_name(record.owner_trust) << '\n';
    }
    for (const auto& [fpr, record] : records_) {
        for (const auto& cert : record.certifications)
            out << "cert: " << cert.certifier_fingerprint << ' ' << fpr << ' '
                << to_hex(cert.signature) << '\n';
    }
    std::filesystem::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw Error(Errc::IoError, "cannot write " + tmp.string());
        f << out.str();
    }
    std::filesystem::rename(tmp, file);
}

TrustStore TrustStore::load(const std::filesystem::path& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f)
        throw Error(Errc::IoError, "cannot read " + file.string());
    TrustStore store;
    std::string line;
    if (!std::getline(f, line) || line != "onion-trust-store-version: 1")
        throw Error(Errc::StoreCorrupt, "missing version header");
    struct PendingCert {
        std::string certifier, subject;
        Bytes signature;
    };
    std::vector<PendingCert> certs;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        std::istringstream fields(line);
        std::string tag;
        fields >> tag;
        if (tag == "key:") {
            std::string fpr, key_hex, level;
            if (!(fields >> fpr >> key_hex >> level))
                throw Error(Errc::StoreCorrupt, "malformed key line");
            Bytes key_bytes = from_hex(key_hex);
            if (key_bytes.size() != crypto::kPublicKeyLen)
                throw Error(Errc::StoreCorrupt, "bad key length");
            crypto::PublicKey pk;
            std::copy(key_bytes.begin(), key_bytes.end(), pk.begin());
            std::string computed = store.add_key(pk);
            if (computed != fpr)
                throw Error(Errc::StoreCorrupt, "fingerprint does not match key: " + fpr);
            store.set_owner_trust(fpr, owner_trust_from_name(level));
        } else if (tag == "cert:") {
            PendingCert c;
            std::string sig_hex;
            if (!(fields >> c.certifier >> c.subject >> sig_hex))
                throw Error(Errc::StoreCorrupt, "malformed cert line");
            c.signature = from_hex(sig_hex);
            certs.push_back(std::move(c));
        } else {
            throw Error(Errc::StoreCorrupt, "unknown record: " + tag);
        }
    }
    for (auto& c : certs) {
        if (!store.records_.contains(c.subject))
            throw Error(Errc::StoreCorrupt, "cert for unknown subject " + c.subject);
        store.import_certification(c.certifier, c.subject, c.signature);
    }
    return store;
}

TrustStore TrustStore::load_or_empty(const std::filesystem::path& file) {
    if (!std::filesystem::exists(file))
        return {};
    return load(file);
}

} // namespace onionbind::trust
