#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "onionbind/crypto.hpp"
#include "onionbind/onionid.hpp"

namespace onionbind::trust {

// Owner trust is the store owner's judgment of a key as an introducer.
// Ultimate keys are the roots: valid by fiat and full introducers.
enum class OwnerTrust { None, Marginal, Full, Ultimate };

enum class Validity { Unknown, MarginallyValid, Valid };

std::string_view owner_trust_name(OwnerTrust t);
OwnerTrust owner_trust_from_name(std::string_view name); // throws Errc::InvalidFieldValue
std::string_view validity_name(Validity v);

// A certification is the certifier's signature over the subject's raw public
// key bytes. `verified` is false only while the certifier's key is absent from
// the store; pending certifications never count toward validity.
struct Certification {
    std::string certifier_fingerprint;
    Bytes signature;
    bool verified = false;
};

struct KeyRecord {
    std::string fingerprint;
    crypto::PublicKey public_key{};
    OwnerTrust owner_trust = OwnerTrust::None;
    std::vector<Certification> certifications;
};

/* Classic web-of-trust validity:
 *   - Ultimate keys are Valid.
 *   - A key is Valid when certified by >= 1 Valid full introducer or >= 3
 *     Valid marginal introducers, MarginallyValid on 1 or 2 marginals.
 *   - Chains are followed at most 5 hops from an Ultimate root.
 *   - Self-certifications never count.
 * Evaluation iterates to a fixed point over the whole store.
 */
class TrustStore {
public:
    // Idempotent; returns the fingerprint. Resolves any certifications that
    // were pending on this key (dropping ones whose signature fails).
    std::string add_key(const crypto::PublicKey& public_key);

    void remove_key(const std::string& fingerprint);

    void set_owner_trust(const std::string& fingerprint, OwnerTrust level); // Errc::UnknownKey
    OwnerTrust owner_trust(const std::string& fingerprint) const;           // Errc::UnknownKey

    // Signs subject's public key with the certifier's secret key. Both keys
    // must already be in the store.
    void certify(const onionid::ServiceIdentity& certifier, const std::string& subject_fingerprint);

    // Imports an externally produced certification. If the certifier's key is
    // known the signature is checked now (Errc::BadCertSignature); otherwise
    // it is held pending.
    void import_certification(const std::string& certifier_fingerprint,
                              const std::string& subject_fingerprint,
                              ByteView signature);

    Validity key_validity(const std::string& fingerprint) const;

    const KeyRecord* find(const std::string& fingerprint) const;
    const std::map<std::string, KeyRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    // Line-based persistence, versioned. Unparseable files throw Errc::StoreCorrupt.
    void save(const std::filesystem::path& file) const;
    static TrustStore load(const std::filesystem::path& file);
    static TrustStore load_or_empty(const std::filesystem::path& file);

private:
    std::map<std::string, KeyRecord> records_;
};

} // namespace onionbind::trust
