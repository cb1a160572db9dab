// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is self-contained and uses fixed seeds, so a run is
// reproducible bit for bit.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "onionbind/cli.hpp"
#include "onionbind/descriptor.hpp"
#include "onionbind/errors.hpp"
#include "onionbind/notary.hpp"
#include "onionbind/verifier.hpp"
#include "testutil.hpp"

using namespace onionbind;
using verifier::VerdictKind;
using testutil::HonestPair;
using testutil::identity_from;
using testutil::install_honest_pair;

namespace {

const TimePoint kNow = parse_rfc3339("2026-08-08T12:00:00Z");
const std::string kWellKnown{descriptor::kWellKnownPath};

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& message) {
        if (!condition && ok) {
            ok = false;
            detail = message;
        }
    }
};

bool run_criterion(int id, const std::string& name, double time_budget_seconds,
                   const std::function<void(Outcome&)>& body) {
    Outcome outcome;
    auto start = std::chrono::steady_clock::now();
    try {
        body(outcome);
    } catch (const std::exception& e) {
        outcome.require(false, std::string("unexpected exception: ") + e.what());
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_budget_seconds > 0 && elapsed >= time_budget_seconds)
        outcome.require(false, "exceeded time budget of " + std::to_string(time_budget_seconds) + "s");
    std::printf("%s  criterion %2d: %s (%.2fs)%s%s\n", outcome.ok ? "PASS" : "FAIL", id,
                name.c_str(), elapsed, outcome.detail.empty() ? "" : " -- ",
                outcome.detail.c_str());
    std::fflush(stdout);
    return outcome.ok;
}

// ---- criterion 2 helper ----------------------------------------------------

double mean_vanity_trials(const std::string& prefix, int runs, std::uint64_t max_trials,
                          std::uint64_t seed_base) {
    std::uint64_t total = 0;
    for (int r = 0; r < runs; ++r) {
        auto result = onionid::vanity_search(prefix, max_trials,
                                             testutil::seed_from(seed_base + static_cast<std::uint64_t>(r)));
        total += result.trials;
    }
    return static_cast<double>(total) / runs;
}

// ---- criterion 4: the corruption table -------------------------------------

void serve_both(simnet::SimNetwork& net, const HonestPair& pair, const std::string& armored) {
    net.register_site(pair.clearnet_host, kWellKnown, armored);
    net.register_site(pair.onion, kWellKnown, armored, pair.service);
}

std::string resign(const HonestPair& pair, descriptor::BindingDescriptor d) {
    return descriptor::armor(descriptor::sign_descriptor(std::move(d), pair.signer));
}

struct CorruptionRow {
    std::string name;
    VerdictKind expected;
    std::function<void(simnet::SimNetwork&, trust::TrustStore&, HonestPair&, HonestPair&)> corrupt;
};

std::vector<CorruptionRow> corruption_table() {
    return {
        {"clearnet descriptor removed", VerdictKind::Missing,
         [](auto& net, auto&, auto& pair, auto&) {
             net.install_adversary(simnet::RemoveDocument{pair.clearnet_host, kWellKnown});
         }},
        {"onion descriptor removed", VerdictKind::Missing,
         [](auto& net, auto&, auto& pair, auto&) {
             net.install_adversary(simnet::RemoveDocument{pair.onion.to_string(), kWellKnown});
         }},
        {"clearnet descriptor garbled", VerdictKind::Missing,
         [](auto& net, auto&, auto& pair, auto&) {
             net.register_site(pair.clearnet_host, kWellKnown, "no armor here at all");
         }},
        {"clearnet side names the other service's onion", VerdictKind::Mismatch,
         [](auto& net, auto&, auto& pair, auto& other) {
             auto d = descriptor::build_descriptor(pair.clearnet_url, other.onion, kNow,
                                                   descriptor::kDefaultLifetime);
             net.register_site(pair.clearnet_host, kWellKnown, resign(pair, d));
         }},
        {"onion side names a different clearnet URL", VerdictKind::Mismatch,
         [](auto& net, auto&, auto& pair, auto&) {
             auto d = descriptor::build_descriptor("http://elsewhere.example", pair.onion, kNow,
                                                   descriptor::kDefaultLifetime);
             net.register_site(pair.onion, kWellKnown, resign(pair, d), pair.service);
         }},
        {"payload byte flipped identically on both sides", VerdictKind::BadSignature,
         [](auto& net, auto&, auto& pair, auto&) {
             std::string tampered = pair.armored;
             std::size_t at = tampered.find("signer: ") + 12;
             tampered[at] = tampered[at] == 'f' ? '0' : 'f';
             serve_both(net, pair, tampered);
         }},
        {"signature truncated on both sides", VerdictKind::BadSignature,
         [](auto& net, auto&, auto& pair, auto&) {
             std::string truncated = pair.armored;
             std::size_t sig_at = truncated.find("signature: ") + 11;
             std::size_t sig_end = truncated.find('\n', sig_at);
             truncated.erase(sig_end - 4, 4);
             serve_both(net, pair, truncated);
         }},
        {"directory override with a substitute key", VerdictKind::AddressKeyMismatch,
         [](auto& net, auto&, auto& pair, auto&) {
             net.install_adversary(
                 simnet::DirectoryOverride{pair.onion, identity_from(987654).public_key});
         }},
        {"both sides point at another live onion service", VerdictKind::Mismatch,
         [](auto& net, auto&, auto& pair, auto& other) {
             auto d = descriptor::build_descriptor(pair.clearnet_url, other.onion, kNow,
                                                   descriptor::kDefaultLifetime);
             std::string armored = resign(pair, d);
             net.register_site(pair.clearnet_host, kWellKnown, armored);
             net.register_site(pair.onion, kWellKnown, armored, pair.service);
         }},
        {"expired descriptor on both sides", VerdictKind::Expired,
         [](auto& net, auto&, auto& pair, auto&) {
             auto d = descriptor::build_descriptor(pair.clearnet_url, pair.onion,
                                                   kNow - std::chrono::days(100),
                                                   std::chrono::days(90));
             serve_both(net, pair, resign(pair, d));
         }},
        {"descriptor issued too far in the future", VerdictKind::Expired,
         [](auto& net, auto&, auto& pair, auto&) {
             auto d = descriptor::build_descriptor(pair.clearnet_url, pair.onion,
                                                   kNow + std::chrono::minutes(10),
                                                   std::chrono::days(90));
             serve_both(net, pair, resign(pair, d));
         }},
        {"signer field lies about the signing key", VerdictKind::BadSignature,
         [](auto& net, auto&, auto& pair, auto&) {
             auto d = pair.plain;
             d.signer_fingerprint = crypto::fingerprint_hex(identity_from(123321).public_key);
             Bytes payload = descriptor::canonical_encode(d);
             descriptor::SignedBindingDescriptor forged{
                 .descriptor = d,
                 .payload = payload,
                 .signature = crypto::sign_detached(payload, pair.signer.secret_key),
                 .signer_public_key = pair.signer.public_key,
             };
             serve_both(net, pair, descriptor::armor(forged));
         }},
    };
}

// ---- criterion 9 helper -----------------------------------------------------

struct LiarStrategy {
    std::string name;
    // digest/fpr/verdict the liars in this configuration report, by liar index
    std::function<notary::Observation(int liar_index)> observation;
};

} // namespace

int main() {
    crypto::init();
    bool all_ok = true;

    all_ok &= run_criterion(1, "address format over 10^4 random identities", 5.0, [](Outcome& t) {
        std::mt19937_64 rng(0xA11CE);
        for (int i = 0; i < 10000; ++i) {
            auto id = identity_from(rng());
            auto address = onionid::derive_onion_address(id.public_key);
            t.require(address.label().size() == onionid::kLabelLength,
                      "label length != 16 at iteration " + std::to_string(i));
            for (char c : address.label())
                t.require(onionid::kAddressAlphabet.find(c) != std::string_view::npos,
                          std::string("character outside alphabet: ") + c);
        }
    });

    all_ok &= run_criterion(2, "vanity trial statistics match the geometric cost", 30.0,
                            [](Outcome& t) {
        double mean1 = mean_vanity_trials("a", 300, 10000, 0xBEE5);
        t.require(mean1 >= 32.0 * 0.8 && mean1 <= 32.0 * 1.2,
                  "prefix length 1: mean " + std::to_string(mean1) + " outside 32 +/- 20%");
        double mean2 = mean_vanity_trials("aa", 200, 400000, 0xCAFE);
        t.require(mean2 >= 1024.0 * 0.75 && mean2 <= 1024.0 * 1.25,
                  "prefix length 2: mean " + std::to_string(mean2) + " outside 1024 +/- 25%");
    });

    all_ok &= run_criterion(3, "exhaustive single-byte descriptor mutation is rejected", 10.0,
                            [](Outcome& t) {
        auto signer = identity_from(31337);
        auto d = descriptor::build_descriptor(
            "http://cupcakebridge.com", onionid::OnionAddress::parse("eynfqhbqa5yecx6s.onion"),
            kNow, descriptor::kDefaultLifetime);
        auto signed_desc = descriptor::sign_descriptor(d, signer);

        Bytes key_and_sig(signed_desc.signer_public_key.begin(),
                          signed_desc.signer_public_key.end());
        key_and_sig.insert(key_and_sig.end(), signed_desc.signature.begin(),
                           signed_desc.signature.end());

        auto assemble = [&](const Bytes& payload, const Bytes& sig_blob) {
            return std::string(descriptor::kBeginMarker) + "\n" + to_string(payload) +
                   "signature: " + base64_encode(sig_blob) + "\n" +
                   std::string(descriptor::kEndMarker) + "\n";
        };
        auto rejected = [&](const std::string& armored) {
            try {
                auto parsed = descriptor::parse_armored(armored);
                return descriptor::verify_signature(parsed) != descriptor::VerifyStatus::Accept;
            } catch (const Error&) {
                return true;
            }
        };

        t.require(!rejected(assemble(signed_desc.payload, key_and_sig)),
                  "the untampered fixture must verify");

        long checked = 0;
        for (std::size_t pos = 0; pos < signed_desc.payload.size(); ++pos) {
            for (int delta = 1; delta < 256; ++delta) {
                Bytes payload = signed_desc.payload;
                payload[pos] = static_cast<std::uint8_t>(payload[pos] ^ delta);
                if (!rejected(assemble(payload, key_and_sig))) {
                    t.require(false, "payload mutation accepted at position " +
                                         std::to_string(pos) + " xor " + std::to_string(delta));
                    return;
                }
                ++checked;
            }
        }
        for (std::size_t pos = 0; pos < key_and_sig.size(); ++pos) {
            for (int delta = 1; delta < 256; ++delta) {
                Bytes blob = key_and_sig;
                blob[pos] = static_cast<std::uint8_t>(blob[pos] ^ delta);
                if (!rejected(assemble(signed_desc.payload, blob))) {
                    t.require(false, "signature-bytes mutation accepted at position " +
                                         std::to_string(pos) + " xor " + std::to_string(delta));
                    return;
                }
                ++checked;
            }
        }
        t.require(checked > 0, "no mutations were checked");
    });

    all_ok &= run_criterion(4, "single-field corruption table maps to expected verdicts", 0,
                            [](Outcome& t) {
        for (auto& row : corruption_table()) {
            simnet::SimNetwork net;
            trust::TrustStore store;
            HonestPair pair = install_honest_pair(net, store, "target.example", kNow, 40000);
            HonestPair other = install_honest_pair(net, store, "bystander.example", kNow, 41000);

            verifier::VerificationReport before = verifier::verify_pair(net, store, pair.clearnet_url, kNow);
            t.require(before.verdict == VerdictKind::Authentic,
                      "fixture must start Authentic for row '" + row.name + "'");

            row.corrupt(net, store, pair, other);
            verifier::VerificationReport after = verifier::verify_pair(net, store, pair.clearnet_url, kNow);
            t.require(after.verdict == row.expected,
                      "row '" + row.name + "': expected " +
                          std::string(verifier::verdict_name(row.expected)) + ", got " +
                          std::string(verifier::verdict_name(after.verdict)));
        }
    });

    all_ok &= run_criterion(5, "self-auth soundness and completeness over 100+100 pairs", 0,
                            [](Outcome& t) {
        simnet::SimNetwork net;
        trust::TrustStore store;
        std::vector<HonestPair> pairs;
        for (int i = 0; i < 100; ++i)
            pairs.push_back(install_honest_pair(net, store,
                                                "site" + std::to_string(i) + ".example", kNow,
                                                50000 + static_cast<std::uint64_t>(i) * 7));
        int authentic = 0;
        for (const auto& pair : pairs)
            authentic += verifier::verify_pair(net, store, pair.clearnet_url, kNow).verdict ==
                         VerdictKind::Authentic;
        t.require(authentic == 100,
                  "honest pairs: " + std::to_string(authentic) + "/100 Authentic");

        std::mt19937_64 rng(0xD1CE);
        int not_authentic = 0, address_key_mismatch = 0;
        for (const auto& pair : pairs) {
            net.install_adversary(
                simnet::DirectoryOverride{pair.onion, identity_from(rng()).public_key});
            auto verdict = verifier::verify_pair(net, store, pair.clearnet_url, kNow).verdict;
            not_authentic += verdict != VerdictKind::Authentic;
            address_key_mismatch += verdict == VerdictKind::AddressKeyMismatch;
        }
        t.require(not_authentic == 100,
                  "directory overrides: " + std::to_string(100 - not_authentic) +
                      " attacks still verified Authentic");
        t.require(address_key_mismatch == 100, "attacks must surface as AddressKeyMismatch");
    });

    all_ok &= run_criterion(6, "tor2web access downgrades and never authenticates", 0,
                            [](Outcome& t) {
        simnet::SimNetwork net;
        trust::TrustStore store;
        verifier::VerifyOptions tor2web;
        tor2web.onion_channel = simnet::Channel::Tor2webProxy;
        for (int i = 0; i < 25; ++i) {
            HonestPair pair = install_honest_pair(net, store,
                                                  "down" + std::to_string(i) + ".example", kNow,
                                                  60000 + static_cast<std::uint64_t>(i) * 3);
            auto full = verifier::verify_pair(net, store, pair.clearnet_url, kNow);
            t.require(full.verdict == VerdictKind::Authentic, "pair must verify over the circuit");
            auto downgraded = verifier::verify_pair(net, store, pair.clearnet_url, kNow, tor2web);
            t.require(downgraded.verdict == VerdictKind::ChannelDowngraded,
                      "tor2web fetch produced " +
                          std::string(verifier::verdict_name(downgraded.verdict)));
        }
    });

    all_ok &= run_criterion(7, "web-of-trust validity matches the brute-force evaluator", 60.0,
                            [](Outcome& t) {
        std::vector<onionid::ServiceIdentity> pool;
        for (std::uint64_t i = 0; i < 6; ++i)
            pool.push_back(identity_from(70000 + i));
        std::vector<std::string> fprs;
        for (const auto& id : pool)
            fprs.push_back(crypto::fingerprint_hex(id.public_key));
        // certification signatures are deterministic per (certifier, subject):
        // cache them once
        std::map<std::pair<std::size_t, std::size_t>, Bytes> cert_cache;
        for (std::size_t a = 0; a < 6; ++a)
            for (std::size_t b = 0; b < 6; ++b)
                if (a != b)
                    cert_cache[{a, b}] = crypto::sign_detached(
                        {pool[b].public_key.data(), pool[b].public_key.size()},
                        pool[a].secret_key);

        std::mt19937_64 rng(20260808);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        static const trust::OwnerTrust levels[] = {
            trust::OwnerTrust::None, trust::OwnerTrust::Marginal, trust::OwnerTrust::Full,
            trust::OwnerTrust::Ultimate};
        long graphs = 0, evaluations = 0;
        for (int g = 0; g < 2000; ++g) {
            std::size_t n = 1 + rng() % 6;
            trust::TrustStore store;
            for (std::size_t i = 0; i < n; ++i) {
                store.add_key(pool[i].public_key);
                store.set_owner_trust(fprs[i], levels[rng() % 4]);
            }
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b)
                    if (a != b && coin(rng) < 0.35)
                        store.import_certification(fprs[a], fprs[b], cert_cache[{a, b}]);
            ++graphs;
            for (std::size_t i = 0; i < n; ++i) {
                ++evaluations;
                auto fast = store.key_validity(fprs[i]);
                auto slow = testutil::oracle_validity(store, fprs[i]);
                if (fast != slow) {
                    t.require(false, "mismatch in graph " + std::to_string(g) + " key " +
                                         std::to_string(i) + ": iterative " +
                                         std::string(trust::validity_name(fast)) + ", oracle " +
                                         std::string(trust::validity_name(slow)));
                    return;
                }
            }
        }
        t.require(graphs == 2000 && evaluations > 2000, "insufficient coverage");
    });

    all_ok &= run_criterion(8, "log tamper evidence: mutation, reorder, truncation", 0,
                            [](Outcome& t) {
        auto identity = identity_from(80000);
        notary::NotaryLog log(identity);
        std::mt19937_64 rng(0x10C);
        for (int i = 0; i < 10; ++i) {
            notary::Observation o;
            o.observed_at = kNow + std::chrono::seconds(i);
            o.onion_address = onionid::derive_onion_address(identity_from(rng()).public_key).to_string();
            o.clearnet_url = "http://entry" + std::to_string(i) + ".example";
            o.descriptor_digest = crypto::sha256_hex(as_bytes("doc" + std::to_string(i)));
            o.signer_fingerprint = crypto::sha256_hex(as_bytes("key" + std::to_string(i % 3)));
            o.verdict = VerdictKind::Authentic;
            log.append(std::move(o));
        }
        std::vector<Bytes> canonical;
        for (const auto& o : log.entries())
            canonical.push_back(notary::canonical_encode(o));
        auto hashes = log.hashes();
        Bytes head_sig = log.head_signature();

        auto check = [&](const std::vector<Bytes>& entries, const std::vector<crypto::Digest>& h) {
            return notary::verify_log(std::span<const Bytes>(entries), h, head_sig,
                                      identity.public_key);
        };
        t.require(check(canonical, hashes).ok, "untampered fixture log must verify");

        for (std::size_t entry = 0; entry < canonical.size(); ++entry) {
            for (std::size_t pos = 0; pos < canonical[entry].size(); ++pos) {
                for (int delta = 1; delta < 256; ++delta) {
                    std::vector<Bytes> mutated = canonical;
                    mutated[entry][pos] = static_cast<std::uint8_t>(mutated[entry][pos] ^ delta);
                    auto result = check(mutated, hashes);
                    if (result.ok || result.first_bad_seq != entry) {
                        t.require(false, "mutation of entry " + std::to_string(entry) +
                                             " byte " + std::to_string(pos) +
                                             (result.ok ? " was accepted"
                                                        : " rejected at wrong seq " +
                                                              std::to_string(result.first_bad_seq)));
                        return;
                    }
                }
            }
        }
        for (std::size_t i = 0; i < canonical.size(); ++i) {
            for (std::size_t j = i + 1; j < canonical.size(); ++j) {
                auto swapped = canonical;
                auto swapped_hashes = hashes;
                std::swap(swapped[i], swapped[j]);
                std::swap(swapped_hashes[i], swapped_hashes[j]);
                auto result = check(swapped, swapped_hashes);
                t.require(!result.ok && result.first_bad_seq == i,
                          "swap " + std::to_string(i) + "/" + std::to_string(j) + " not caught at " +
                              std::to_string(i));
            }
        }
        for (std::size_t keep = 0; keep < canonical.size(); ++keep) {
            std::vector<Bytes> cut(canonical.begin(), canonical.begin() + static_cast<std::ptrdiff_t>(keep));
            std::vector<crypto::Digest> cut_hashes(hashes.begin(),
                                                   hashes.begin() + static_cast<std::ptrdiff_t>(keep));
            auto result = check(cut, cut_hashes);
            t.require(!result.ok && result.first_bad_seq == keep,
                      "truncation to " + std::to_string(keep) + " not caught at the cut");
        }
    });

    all_ok &= run_criterion(9, "quorum safety under exhaustive liar subsets (n <= 5)", 0,
                            [](Outcome& t) {
        const std::string honest_digest = crypto::sha256_hex(as_bytes("honest descriptor"));
        const std::string honest_fpr = crypto::sha256_hex(as_bytes("honest signer"));
        const std::string fake_a = crypto::sha256_hex(as_bytes("fake a"));
        const std::string fake_b = crypto::sha256_hex(as_bytes("fake b"));

        auto make_obs = [](const std::string& digest, const std::string& fpr, VerdictKind v) {
            notary::Observation o;
            o.descriptor_digest = digest;
            o.signer_fingerprint = fpr;
            o.verdict = v;
            return o;
        };
        std::vector<LiarStrategy> strategies{
            {"collude on one fake digest",
             [&](int) { return make_obs(fake_a, honest_fpr, VerdictKind::Authentic); }},
            {"split across two fakes",
             [&](int liar) {
                 return make_obs(liar % 2 == 0 ? fake_a : fake_b, honest_fpr,
                                 VerdictKind::Authentic);
             }},
            {"forge the signer as well",
             [&](int) {
                 return make_obs(fake_a, crypto::sha256_hex(as_bytes("fake signer")),
                                 VerdictKind::SelfConsistentUntrusted);
             }},
            {"report the pair missing",
             [&](int) { return make_obs(std::string(64, '0'), std::string(64, '0'),
                                        VerdictKind::Missing); }},
        };

        long configurations = 0;
        for (std::size_t n = 1; n <= 5; ++n) {
            std::size_t k = notary::default_quorum(n);
            for (unsigned mask = 0; mask < (1u << n); ++mask) {
                std::size_t liars = static_cast<std::size_t>(__builtin_popcount(mask));
                for (const auto& strategy : strategies) {
                    std::vector<notary::NotaryReport> reports;
                    int liar_index = 0;
                    for (std::size_t i = 0; i < n; ++i) {
                        bool lies = mask & (1u << i);
                        reports.push_back(
                            {"notary" + std::to_string(i),
                             lies ? strategy.observation(liar_index++)
                                  : make_obs(honest_digest, honest_fpr,
                                             i % 2 == 0 ? VerdictKind::Authentic
                                                        : VerdictKind::SelfConsistentUntrusted)});
                    }
                    auto result = notary::quorum_verdict(reports, k);
                    ++configurations;
                    if (liars < k) {
                        if (result.kind == notary::QuorumKind::Agreed) {
                            t.require(result.descriptor_digest == honest_digest &&
                                          result.signer_fingerprint == honest_fpr,
                                      "agreed on a non-honest digest with " +
                                          std::to_string(liars) + " liars of " + std::to_string(n) +
                                          " (" + strategy.name + ")");
                        }
                        t.require(result.kind != notary::QuorumKind::Conflict,
                                  "conflict reported under a majority threshold");
                        if (n - liars >= k) {
                            t.require(result.kind == notary::QuorumKind::Agreed,
                                      "honest majority failed to agree: n=" + std::to_string(n) +
                                          " liars=" + std::to_string(liars) + " (" + strategy.name +
                                          ")");
                        }
                    }
                }
            }
        }
        t.require(configurations > 0, "no configurations enumerated");
    });

    all_ok &= run_criterion(10, "end-to-end demo over loopback HTTP", 10.0, [](Outcome& t) {
        std::ostringstream out, err;
        int code = cli::dispatch({"--format", "machine", "demo"}, out, err);
        t.require(code == 0, "demo exited " + std::to_string(code) + ": " + err.str());
        std::istringstream lines(out.str());
        std::string line;
        std::vector<nlohmann::json> objects;
        while (std::getline(lines, line))
            objects.push_back(nlohmann::json::parse(line));
        t.require(objects.size() == 3, "expected 3 machine lines");
        if (objects.size() == 3) {
            t.require(objects[0]["verdict"] == "Authentic", "honest pair must be Authentic");
            t.require(objects[1]["verdict"] == "AddressKeyMismatch",
                      "attacked pair must be AddressKeyMismatch");
            t.require(objects[2]["honest_exit"] == 0, "honest exit code must be 0");
            t.require(objects[2]["attacked_exit"] == 7,
                      "attacked exit code must be 7 (AddressKeyMismatch)");
        }
    });

    std::printf("%s\n", all_ok ? "acceptance: all criteria passed"
                               : "acceptance: FAILURES above");
    return all_ok ? 0 : 1;
}
