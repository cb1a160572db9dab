#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "onionbind/crypto.hpp"
#include "onionbind/simnet.hpp"
#include "onionbind/timeutil.hpp"
#include "onionbind/trust.hpp"
#include "onionbind/verifier.hpp"

namespace onionbind::notary {

// One distilled verification outcome. The descriptor digest is the SHA-256 of
// the shared canonical descriptor bytes, all-zero when no descriptor was
// established; the signer fingerprint is all-zero when unavailable.
struct Observation {
    std::uint64_t seq = 0;
    TimePoint observed_at{};
    std::string onion_address;
    std::string clearnet_url;
    std::string descriptor_digest;   // 64 hex
    std::string signer_fingerprint;  // 64 hex
    verifier::VerdictKind verdict = verifier::VerdictKind::Missing;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/* Canonical observation encoding, same line discipline as descriptors:
 *   seq / observed / onion / clearnet / descriptor-digest / signer / verdict
 */
Bytes canonical_encode(const Observation& o);
Observation parse_canonical(std::string_view text); // throws Errc::LogCorrupt

inline constexpr crypto::Digest kZeroDigest{};

// entry_hash[i] = SHA-256(entry_hash[i-1] || canonical(entries[i])), with a
// 32-zero-byte hash before the first entry.
crypto::Digest chain_hash(const crypto::Digest& prev, ByteView canonical);

// The head signature covers latest_hash || seq as hash_bytes || u64-BE count,
// where count = latest seq + 1 (0 for an empty log), so an empty log is
// signable too.
Bytes head_message(const crypto::Digest& latest_hash, std::uint64_t entry_count);

struct Target {
    std::string clearnet_url;
    std::string onion_address; // "<label>.onion"
};

struct HistoryEntry {
    Observation observation;
    crypto::Digest entry_hash{};
    crypto::Digest prev_hash{};
};

/* Append-only, hash-chained, notary-signed log of observations.
 *
 * Persistence is one append-only file of armored observation records plus a
 * sidecar head file, rewritten atomically after each append. Reopening drops a
 * torn final record (detected by parse or chain mismatch) and re-signs the
 * head; corruption anywhere earlier refuses to load.
 *
 * Single writer, any number of readers; readers get consistent snapshots.
 */
class NotaryLog {
public:
    explicit NotaryLog(onionid::ServiceIdentity identity);                      // in-memory
    NotaryLog(onionid::ServiceIdentity identity, std::filesystem::path dir);    // persistent

    // Runs verify_pair and appends the distilled outcome. Verification
    // failures are recorded, never raised; the append is atomic.
    Observation observe(simnet::Network& net, const trust::TrustStore& store,
                        const Target& target, TimePoint now,
                        const verifier::VerifyOptions& options = {});

    Observation append(Observation fields); // seq assigned here

    std::vector<Observation> entries() const;
    std::vector<crypto::Digest> hashes() const;
    std::uint64_t count() const;
    crypto::Digest head_hash() const;
    Bytes head_signature() const;
    const crypto::PublicKey& public_key() const { return identity_.public_key; }

    // All observations of one address, ascending seq, with the per-entry and
    // previous hashes needed to check each chain link.
    std::vector<HistoryEntry> query_history(const onionid::OnionAddress& address) const;

private:
    void append_locked(Observation o);
    void persist_record(const Observation& o, const crypto::Digest& hash);
    void persist_head();
    void load_from_disk();

    onionid::ServiceIdentity identity_;
    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mu_;
    std::vector<Observation> entries_;
    std::vector<crypto::Digest> hashes_;
    Bytes head_sig_;
};

struct LogCheck {
    bool ok = false;
    std::uint64_t first_bad_seq = 0; // entries.size() when only the head fails
    std::string reason;
};

// Byte-level verifier: recomputes the whole chain and checks the head
// signature. Rejects at the earliest inconsistent entry.
LogCheck verify_log(std::span<const Bytes> canonical_entries,
                    std::span<const crypto::Digest> hashes,
                    ByteView head_signature,
                    const crypto::PublicKey& notary_key);

LogCheck verify_log(std::span<const Observation> entries,
                    std::span<const crypto::Digest> hashes,
                    ByteView head_signature,
                    const crypto::PublicKey& notary_key);

enum class KeyChangeKind { Stable, KeyChanged, NewService };

struct KeyChange {
    KeyChangeKind kind = KeyChangeKind::Stable;
    std::uint64_t at_seq = 0; // meaningful for KeyChanged
};

// NewService on empty history; KeyChanged at the first observation whose
// signer fingerprint differs from the previous non-zero one; Stable otherwise.
// All-zero fingerprints (failed observations) neither change nor reset the key.
KeyChange detect_key_change(std::span<const Observation> history);

struct NotaryReport {
    std::string notary_id;
    Observation latest;
};

enum class QuorumKind { Agreed, NoQuorum, Conflict };
std::string_view quorum_kind_name(QuorumKind k);

struct QuorumResult {
    QuorumKind kind = QuorumKind::NoQuorum;
    std::string descriptor_digest;
    std::string signer_fingerprint;
};

inline std::size_t default_quorum(std::size_t n) { return n / 2 + 1; }

// Agreed when at least k reports share one (digest, fingerprint) with verdict
// Authentic or SelfConsistentUntrusted; Conflict when two distinct non-zero
// digests both reach k; NoQuorum otherwise. Throws Errc::InvalidThreshold.
QuorumResult quorum_verdict(std::span<const NotaryReport> reports, std::size_t k);

// One deterministic pass over the targets in input order. Per-target failures
// are recorded as Missing observations.
void crawl_once(NotaryLog& log, simnet::Network& net, const trust::TrustStore& store,
                std::span<const Target> targets, TimePoint now,
                const verifier::VerifyOptions& options = {});

} // namespace onionbind::notary
