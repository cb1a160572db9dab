#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "onionbind/notary.hpp"

namespace httplib {
class Server;
}

namespace onionbind::notary {

/* HTTP face of one notary plus its crawler.
 *
 *   GET /v1/history?onion=<label>.onion  JSON array of observations, each with
 *                                        entry_hash and prev_hash
 *   GET /v1/head                         {"seq","hash","signature","notary_key"}
 *
 * The crawler thread is the log's single writer; the listener serves snapshot
 * reads concurrently.
 */
class NotaryServer {
public:
    NotaryServer(NotaryLog& log, simnet::Network& net, const trust::TrustStore& store,
                 std::vector<Target> targets, std::chrono::seconds interval,
                 verifier::VerifyOptions options = {});
    ~NotaryServer();

    NotaryServer(const NotaryServer&) = delete;
    NotaryServer& operator=(const NotaryServer&) = delete;

    int start(int port = 0); // returns bound port
    void stop();

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    void crawl_loop();

    NotaryLog& log_;
    simnet::Network& net_;
    const trust::TrustStore& store_;
    std::vector<Target> targets_;
    std::chrono::seconds interval_;
    verifier::VerifyOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread http_thread_;
    std::thread crawl_thread_;
    std::atomic<bool> stopping_{false};
    int port_ = -1;
};

struct RemoteObservation {
    Observation observation;
    crypto::Digest entry_hash{};
    crypto::Digest prev_hash{};
};

struct RemoteHead {
    std::int64_t seq = -1; // latest seq, -1 for an empty log
    crypto::Digest hash{};
    Bytes signature;
    crypto::PublicKey notary_key{};
};

// Throw Errc::NotFound on connection failure and Errc::LogCorrupt on
// malformed replies.
RemoteHead fetch_head(const std::string& base_url);
std::vector<RemoteObservation> fetch_history(const std::string& base_url,
                                             const std::string& onion_address);

struct NotaryAnswer {
    std::string base_url;
    RemoteHead head;
    std::vector<RemoteObservation> history;
    bool links_ok = false;      // every returned entry rehashes from prev_hash
    bool head_ok = false;       // head signature verifies under notary_key
    KeyChange key_change;
};

// Queries each notary, checks what is checkable, and aggregates the latest
// observations into a quorum verdict with threshold k (default majority).
struct QueryOutcome {
    std::vector<NotaryAnswer> answers;
    QuorumResult quorum;
};
QueryOutcome query_notaries(const std::vector<std::string>& base_urls,
                            const std::string& onion_address,
                            std::optional<std::size_t> quorum_k = std::nullopt);

} // namespace onionbind::notary
