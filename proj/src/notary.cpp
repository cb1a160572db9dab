#include "onionbind/notary.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "onionbind/errors.hpp"

namespace onionbind::notary {

namespace {

constexpr std::string_view kRecordBegin = "-----BEGIN NOTARY OBSERVATION-----";
constexpr std::string_view kRecordEnd = "-----END NOTARY OBSERVATION-----";
constexpr std::string_view kLogFile = "observations.log";
constexpr std::string_view kHeadFile = "head";

const std::string kZeroHex(64, '0');

verifier::VerdictKind verdict_from_name(std::string_view name) {
    using verifier::VerdictKind;
    for (auto kind : {VerdictKind::Authentic, VerdictKind::SelfConsistentUntrusted,
                      VerdictKind::ChannelDowngraded, VerdictKind::Mismatch,
                      VerdictKind::BadSignature, VerdictKind::AddressKeyMismatch,
                      VerdictKind::Expired, VerdictKind::Missing}) {
        if (verifier::verdict_name(kind) == name)
            return kind;
    }
    throw Error(Errc::LogCorrupt, "unknown verdict: " + std::string(name));
}

} // namespace

Bytes canonical_encode(const Observation& o) {
    std::ostringstream out;
    out << "seq: " << o.seq << '\n'
        << "observed: " << format_rfc3339(o.observed_at) << '\n'
        << "onion: " << o.onion_address << '\n'
        << "clearnet: " << o.clearnet_url << '\n'
        << "descriptor-digest: " << o.descriptor_digest << '\n'
        << "signer: " << o.signer_fingerprint << '\n'
        << "verdict: " << verifier::verdict_name(o.verdict) << '\n';
    std::string s = out.str();
    return Bytes(s.begin(), s.end());
}

Observation parse_canonical(std::string_view text) {
    std::map<std::string, std::string> fields;
    std::string_view rest = text;
    while (!rest.empty()) {
        std::size_t nl = rest.find('\n');
        if (nl == std::string_view::npos)
            throw Error(Errc::LogCorrupt, "unterminated observation line");
        std::string_view line = rest.substr(0, nl);
        rest.remove_prefix(nl + 1);
        std::size_t sep = line.find(": ");
        if (sep == std::string_view::npos)
            throw Error(Errc::LogCorrupt, "malformed observation line");
        if (!fields.emplace(line.substr(0, sep), line.substr(sep + 2)).second)
            throw Error(Errc::LogCorrupt, "duplicate observation field");
    }
    for (std::string_view required :
         {"seq", "observed", "onion", "clearnet", "descriptor-digest", "signer", "verdict"})
        if (!fields.contains(std::string(required)))
            throw Error(Errc::LogCorrupt, "missing observation field: " + std::string(required));
    Observation o;
    try {
        o.seq = std::stoull(fields["seq"]);
    } catch (const std::exception&) {
        throw Error(Errc::LogCorrupt, "bad seq: " + fields["seq"]);
    }
    o.observed_at = parse_rfc3339(fields["observed"]);
    o.onion_address = fields["onion"];
    o.clearnet_url = fields["clearnet"];
    o.descriptor_digest = fields["descriptor-digest"];
    o.signer_fingerprint = fields["signer"];
    o.verdict = verdict_from_name(fields["verdict"]);
    return o;
}

crypto::Digest chain_hash(const crypto::Digest& prev, ByteView canonical) {
    Bytes input;
    input.reserve(prev.size() + canonical.size());
    input.insert(input.end(), prev.begin(), prev.end());
    input.insert(input.end(), canonical.begin(), canonical.end());
    return crypto::sha256(input);
}

Bytes head_message(const crypto::Digest& latest_hash, std::uint64_t entry_count) {
    Bytes msg(latest_hash.begin(), latest_hash.end());
    for (int shift = 56; shift >= 0; shift -= 8)
        msg.push_back(static_cast<std::uint8_t>(entry_count >> shift & 0xff));
    return msg;
}

NotaryLog::NotaryLog(onionid::ServiceIdentity identity) : identity_(std::move(identity)) {
    head_sig_ = crypto::sign_detached(head_message(kZeroDigest, 0), identity_.secret_key);
}

NotaryLog::NotaryLog(onionid::ServiceIdentity identity, std::filesystem::path dir)
    : identity_(std::move(identity)), dir_(std::move(dir)) {
    std::filesystem::create_directories(*dir_);
    load_from_disk();
    head_sig_ = crypto::sign_detached(
        head_message(entries_.empty() ? kZeroDigest : hashes_.back(), entries_.size()),
        identity_.secret_key);
    persist_head();
}

Observation NotaryLog::observe(simnet::Network& net, const trust::TrustStore& store,
                               const Target& target, TimePoint now,
                               const verifier::VerifyOptions& options) {
    verifier::VerificationReport report;
    try {
        report = verifier::verify_pair(net, store, target.clearnet_url, now, options);
    } catch (const std::exception&) {
        report.verdict = verifier::VerdictKind::Missing;
    }
    Observation o;
    o.observed_at = now;
    o.onion_address = target.onion_address;
    o.clearnet_url = target.clearnet_url;
    o.verdict = report.verdict;
    if (report.shared_descriptor) {
        o.descriptor_digest = crypto::sha256_hex(descriptor::canonical_encode(*report.shared_descriptor));
        o.signer_fingerprint = report.shared_descriptor->signer_fingerprint;
    } else if (!report.signer_fingerprint.empty()) {
        // A descriptor was parsed but the pair failed later checks; still worth
        // recording which key signed what we saw.
        o.descriptor_digest = kZeroHex;
        o.signer_fingerprint = report.signer_fingerprint;
    } else {
        o.descriptor_digest = kZeroHex;
        o.signer_fingerprint = kZeroHex;
    }
    return append(std::move(o));
}

Observation NotaryLog::append(Observation fields) {
    std::lock_guard lock(mu_);
    fields.seq = entries_.size();
    append_locked(fields);
    return entries_.back();
}

void NotaryLog::append_locked(Observation o) {
    crypto::Digest prev = entries_.empty() ? kZeroDigest : hashes_.back();
    crypto::Digest hash = chain_hash(prev, canonical_encode(o));
    // Record first, head second; a crash in between leaves a recoverable log
    // whose head is one entry behind and gets re-signed on open.
    if (dir_)
        persist_record(o, hash);
    entries_.push_back(std::move(o));
    hashes_.push_back(hash);
    head_sig_ = crypto::sign_detached(head_message(hash, entries_.size()), identity_.secret_key);
    if (dir_)
        persist_head();
}

std::vector<Observation> NotaryLog::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

std::vector<crypto::Digest> NotaryLog::hashes() const {
    std::lock_guard lock(mu_);
    return hashes_;
}

std::uint64_t NotaryLog::count() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

crypto::Digest NotaryLog::head_hash() const {
    std::lock_guard lock(mu_);
    return entries_.empty() ? kZeroDigest : hashes_.back();
}

Bytes NotaryLog::head_signature() const {
    std::lock_guard lock(mu_);
    return head_sig_;
}

std::vector<HistoryEntry> NotaryLog::query_history(const onionid::OnionAddress& address) const {
    std::lock_guard lock(mu_);
    std::vector<HistoryEntry> out;
    std::string wanted = address.to_string();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].onion_address != wanted)
            continue;
        out.push_back({entries_[i], hashes_[i], i == 0 ? kZeroDigest : hashes_[i - 1]});
    }
    return out;
}

void NotaryLog::persist_record(const Observation& o, const crypto::Digest& hash) {
    std::ofstream f(*dir_ / kLogFile, std::ios::binary | std::ios::app);
    if (!f)
        throw Error(Errc::IoError, "cannot append to observation log");
    Bytes canonical = canonical_encode(o);
    f << kRecordBegin << '\n';
    f.write(reinterpret_cast<const char*>(canonical.data()),
            static_cast<std::streamsize>(canonical.size()));
    f << "entry-hash: " << to_hex({hash.data(), hash.size()}) << '\n';
    f << kRecordEnd << '\n';
    f.flush();
    if (!f)
        throw Error(Errc::IoError, "failed writing observation record");
}

void NotaryLog::persist_head() {
    std::filesystem::path head = *dir_ / kHeadFile;
    std::filesystem::path tmp = head;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw Error(Errc::IoError, "cannot write head file");
        crypto::Digest latest = entries_.empty() ? kZeroDigest : hashes_.back();
        f << "entries: " << entries_.size() << '\n'
          << "hash: " << to_hex({latest.data(), latest.size()}) << '\n'
          << "signature: " << to_hex(head_sig_) << '\n'
          << "public-key: " << to_hex({identity_.public_key.data(), identity_.public_key.size()})
          << '\n';
    }
    std::filesystem::rename(tmp, head);
}

void NotaryLog::load_from_disk() {
    std::filesystem::path log = *dir_ / kLogFile;
    if (!std::filesystem::exists(log))
        return;
    std::ifstream f(log, std::ios::binary);
    std::stringstream buffer;
    buffer << f.rdbuf();
    std::string content = buffer.str();

    struct RawRecord {
        std::string canonical;
        std::string stored_hash;
        bool complete = false;
    };
    std::vector<RawRecord> records;
    std::string_view rest = content;
    while (!rest.empty()) {
        std::size_t begin = rest.find(kRecordBegin);
        if (begin == std::string_view::npos) {
            // trailing garbage with no begin marker: torn tail
            if (rest.find_first_not_of(" \t\n") != std::string_view::npos)
                records.push_back({});
            break;
        }
        if (begin + kRecordBegin.size() + 1 > rest.size()) {
            records.push_back({}); // file ends mid-marker
            break;
        }
        rest.remove_prefix(begin + kRecordBegin.size() + 1);
        std::size_t end = rest.find(kRecordEnd);
        RawRecord record;
        if (end == std::string_view::npos) {
            records.push_back(std::move(record)); // incomplete tail record
            break;
        }
        std::string_view body = rest.substr(0, end);
        rest.remove_prefix(end + kRecordEnd.size());
        std::size_t hash_line = body.rfind("entry-hash: ");
        if (hash_line != std::string_view::npos) {
            record.canonical = std::string(body.substr(0, hash_line));
            std::string_view hash_part = body.substr(hash_line + 12);
            if (!hash_part.empty() && hash_part.back() == '\n')
                hash_part.remove_suffix(1);
            record.stored_hash = std::string(hash_part);
            record.complete = true;
        }
        records.push_back(std::move(record));
    }

    crypto::Digest prev = kZeroDigest;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const RawRecord& record = records[i];
        bool last = i + 1 == records.size();
        std::string problem;
        Observation o;
        crypto::Digest hash{};
        if (!record.complete) {
            problem = "incomplete record";
        } else {
            try {
                o = parse_canonical(record.canonical);
                hash = chain_hash(prev, as_bytes(record.canonical));
                if (to_hex({hash.data(), hash.size()}) != record.stored_hash)
                    problem = "chain hash mismatch";
                else if (o.seq != entries_.size())
                    problem = "sequence gap";
            } catch (const Error& e) {
                problem = e.what();
            }
        }
        if (!problem.empty()) {
            // Only a torn final record is recoverable; anything earlier means
            // the log was tampered with or damaged beyond a crashed append.
            if (last)
                break;
            throw Error(Errc::LogCorrupt,
                        "record " + std::to_string(i) + ": " + problem);
        }
        entries_.push_back(std::move(o));
        hashes_.push_back(hash);
        prev = hash;
    }

    // Rewrite the file if we dropped a torn tail.
    if (records.size() != entries_.size()) {
        std::filesystem::path tmp = log;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            for (std::size_t i = 0; i < entries_.size(); ++i) {
                Bytes canonical = canonical_encode(entries_[i]);
                out << kRecordBegin << '\n';
                out.write(reinterpret_cast<const char*>(canonical.data()),
                          static_cast<std::streamsize>(canonical.size()));
                out << "entry-hash: " << to_hex({hashes_[i].data(), hashes_[i].size()}) << '\n';
                out << kRecordEnd << '\n';
            }
        }
        std::filesystem::rename(tmp, log);
    }
}

LogCheck verify_log(std::span<const Bytes> canonical_entries,
                    std::span<const crypto::Digest> hashes,
                    ByteView head_signature,
                    const crypto::PublicKey& notary_key) {
    if (canonical_entries.size() != hashes.size())
        return {false, std::min(canonical_entries.size(), hashes.size()),
                "entry/hash count mismatch"};
    crypto::Digest prev = kZeroDigest;
    for (std::size_t i = 0; i < canonical_entries.size(); ++i) {
        crypto::Digest computed = chain_hash(prev, canonical_entries[i]);
        if (computed != hashes[i])
            return {false, i, "chain hash mismatch"};
        prev = computed;
    }
    Bytes msg = head_message(prev, canonical_entries.size());
    if (!crypto::verify_detached(msg, head_signature, notary_key))
        return {false, canonical_entries.size(), "head signature does not verify"};
    return {true, 0, ""};
}

LogCheck verify_log(std::span<const Observation> entries,
                    std::span<const crypto::Digest> hashes,
                    ByteView head_signature,
                    const crypto::PublicKey& notary_key) {
    std::vector<Bytes> canonical;
    canonical.reserve(entries.size());
    for (const auto& o : entries)
        canonical.push_back(canonical_encode(o));
    return verify_log(std::span<const Bytes>(canonical), hashes, head_signature, notary_key);
}

KeyChange detect_key_change(std::span<const Observation> history) {
    if (history.empty())
        return {KeyChangeKind::NewService, 0};
    std::string last_key;
    for (const auto& o : history) {
        if (o.signer_fingerprint.empty() || o.signer_fingerprint == kZeroHex)
            continue;
        if (last_key.empty()) {
            last_key = o.signer_fingerprint;
        } else if (o.signer_fingerprint != last_key) {
            return {KeyChangeKind::KeyChanged, o.seq};
        }
    }
    return {KeyChangeKind::Stable, 0};
}

std::string_view quorum_kind_name(QuorumKind k) {
    switch (k) {
    case QuorumKind::Agreed: return "Agreed";
    case QuorumKind::NoQuorum: return "NoQuorum";
    case QuorumKind::Conflict: return "Conflict";
    }
    return "?";
}

QuorumResult quorum_verdict(std::span<const NotaryReport> reports, std::size_t k) {
    if (k < 1 || k > reports.size())
        throw Error(Errc::InvalidThreshold,
                    "threshold must be between 1 and " + std::to_string(reports.size()));
    // Group by (digest, signer); only observations that established a
    // consistent descriptor can vouch for one.
    std::map<std::pair<std::string, std::string>, std::size_t> votes;
    for (const auto& report : reports) {
        const auto& o = report.latest;
        if (o.verdict != verifier::VerdictKind::Authentic &&
            o.verdict != verifier::VerdictKind::SelfConsistentUntrusted)
            continue;
        if (o.descriptor_digest == kZeroHex)
            continue;
        ++votes[{o.descriptor_digest, o.signer_fingerprint}];
    }
    std::vector<std::pair<std::string, std::string>> reaching;
    for (const auto& [key, count] : votes)
        if (count >= k)
            reaching.push_back(key);
    if (reaching.size() >= 2)
        return {QuorumKind::Conflict, "", ""};
    if (reaching.size() == 1)
        return {QuorumKind::Agreed, reaching[0].first, reaching[0].second};
    return {QuorumKind::NoQuorum, "", ""};
}

void crawl_once(NotaryLog& log, simnet::Network& net, const trust::TrustStore& store,
                std::span<const Target> targets, TimePoint now,
                const verifier::VerifyOptions& options) {
    for (const auto& target : targets)
        log.observe(net, store, target, now, options);
}

} // namespace onionbind::notary
