#include "onionbind/notaryd.hpp"

#include <httplib.h>
#include <json.hpp>

#include "onionbind/errors.hpp"

namespace onionbind::notary {

namespace {

using nlohmann::json;

json observation_json(const Observation& o) {
    return json{
        {"seq", o.seq},
        {"observed_at", format_rfc3339(o.observed_at)},
        {"onion", o.onion_address},
        {"clearnet", o.clearnet_url},
        {"descriptor_digest", o.descriptor_digest},
        {"signer_fingerprint", o.signer_fingerprint},
        {"verdict", std::string(verifier::verdict_name(o.verdict))},
    };
}

Observation observation_from_json(const json& j) {
    Observation o;
    o.seq = j.at("seq").get<std::uint64_t>();
    o.observed_at = parse_rfc3339(j.at("observed_at").get<std::string>());
    o.onion_address = j.at("onion").get<std::string>();
    o.clearnet_url = j.at("clearnet").get<std::string>();
    o.descriptor_digest = j.at("descriptor_digest").get<std::string>();
    o.signer_fingerprint = j.at("signer_fingerprint").get<std::string>();
    o.verdict = [&] {
        std::string name = j.at("verdict").get<std::string>();
        using verifier::VerdictKind;
        for (auto kind : {VerdictKind::Authentic, VerdictKind::SelfConsistentUntrusted,
                          VerdictKind::ChannelDowngraded, VerdictKind::Mismatch,
                          VerdictKind::BadSignature, VerdictKind::AddressKeyMismatch,
                          VerdictKind::Expired, VerdictKind::Missing})
            if (verifier::verdict_name(kind) == name)
                return kind;
        throw Error(Errc::LogCorrupt, "unknown verdict in reply: " + name);
    }();
    return o;
}

crypto::Digest digest_from_hex(const std::string& hex) {
    Bytes bytes = from_hex(hex);
    if (bytes.size() != crypto::kDigestLen)
        throw Error(Errc::LogCorrupt, "bad digest length");
    crypto::Digest d;
    std::copy(bytes.begin(), bytes.end(), d.begin());
    return d;
}

std::pair<std::string, int> split_base_url(const std::string& base_url) {
    Url url = Url::parse(base_url);
    std::size_t colon = url.host.rfind(':');
    if (colon == std::string::npos)
        throw Error(Errc::InvalidUrl, "notary URL needs an explicit port");
    return {url.host.substr(0, colon), std::stoi(url.host.substr(colon + 1))};
}

} // namespace

NotaryServer::NotaryServer(NotaryLog& log, simnet::Network& net, const trust::TrustStore& store,
                           std::vector<Target> targets, std::chrono::seconds interval,
                           verifier::VerifyOptions options)
    : log_(log), net_(net), store_(store), targets_(std::move(targets)), interval_(interval),
      options_(options) {}

NotaryServer::~NotaryServer() {
    stop();
}

int NotaryServer::start(int port) {
    server_ = std::make_unique<httplib::Server>();

    server_->Get("/v1/head", [this](const httplib::Request&, httplib::Response& res) {
        std::uint64_t count = log_.count();
        crypto::Digest hash = log_.head_hash();
        json j{
            {"seq", static_cast<std::int64_t>(count) - 1},
            {"hash", to_hex({hash.data(), hash.size()})},
            {"signature", to_hex(log_.head_signature())},
            {"notary_key", to_hex({log_.public_key().data(), log_.public_key().size()})},
        };
        res.set_content(j.dump(), "application/json");
    });

    server_->Get("/v1/history", [this](const httplib::Request& req, httplib::Response& res) {
        std::string onion = req.get_param_value("onion");
        onionid::OnionAddress address = onionid::OnionAddress::parse(onion);
        json out = json::array();
        for (const auto& entry : log_.query_history(address)) {
            json j = observation_json(entry.observation);
            j["entry_hash"] = to_hex({entry.entry_hash.data(), entry.entry_hash.size()});
            j["prev_hash"] = to_hex({entry.prev_hash.data(), entry.prev_hash.size()});
            out.push_back(std::move(j));
        }
        res.set_content(out.dump(), "application/json");
    });

    server_->set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string detail = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                detail = e.what();
            } catch (...) {
            }
            res.status = 400;
            res.set_content(json{{"error", detail}}.dump(), "application/json");
        });

    if (port == 0) {
        port_ = server_->bind_to_any_port("127.0.0.1");
        if (port_ < 0)
            throw Error(Errc::IoError, "cannot bind notary port");
    } else {
        if (!server_->bind_to_port("127.0.0.1", port))
            throw Error(Errc::IoError, "cannot bind port " + std::to_string(port));
        port_ = port;
    }
    http_thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    crawl_thread_ = std::thread([this] { crawl_loop(); });
    return port_;
}

void NotaryServer::stop() {
    stopping_.store(true);
    if (crawl_thread_.joinable())
        crawl_thread_.join();
    if (server_) {
        server_->stop();
        if (http_thread_.joinable())
            http_thread_.join();
        server_.reset();
    }
}

void NotaryServer::crawl_loop() {
    while (!stopping_.load()) {
        crawl_once(log_, net_, store_, targets_, now_utc(), options_);
        // Sleep in small steps so stop() stays responsive.
        auto remaining = std::chrono::milliseconds(interval_);
        while (remaining.count() > 0 && !stopping_.load()) {
            auto step = std::min(remaining, std::chrono::milliseconds(50));
            std::this_thread::sleep_for(step);
            remaining -= step;
        }
    }
}

RemoteHead fetch_head(const std::string& base_url) {
    auto [host, port] = split_base_url(base_url);
    httplib::Client client(host, port);
    client.set_connection_timeout(5, 0);
    auto res = client.Get("/v1/head");
    if (!res || res->status != 200)
        throw Error(Errc::NotFound, "cannot reach notary at " + base_url);
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded())
        throw Error(Errc::LogCorrupt, "notary head reply is not JSON");
    RemoteHead head;
    head.seq = j.at("seq").get<std::int64_t>();
    head.hash = digest_from_hex(j.at("hash").get<std::string>());
    head.signature = from_hex(j.at("signature").get<std::string>());
    Bytes key = from_hex(j.at("notary_key").get<std::string>());
    if (key.size() != crypto::kPublicKeyLen)
        throw Error(Errc::LogCorrupt, "bad notary key length");
    std::copy(key.begin(), key.end(), head.notary_key.begin());
    return head;
}

std::vector<RemoteObservation> fetch_history(const std::string& base_url,
                                             const std::string& onion_address) {
    auto [host, port] = split_base_url(base_url);
    httplib::Client client(host, port);
    client.set_connection_timeout(5, 0);
    httplib::Params params{{"onion", onion_address}};
    auto res = client.Get("/v1/history", params, httplib::Headers{});
    if (!res || res->status != 200)
        throw Error(Errc::NotFound, "cannot reach notary at " + base_url);
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.is_array())
        throw Error(Errc::LogCorrupt, "notary history reply is not a JSON array");
    std::vector<RemoteObservation> out;
    for (const auto& item : j) {
        RemoteObservation r;
        r.observation = observation_from_json(item);
        r.entry_hash = digest_from_hex(item.at("entry_hash").get<std::string>());
        r.prev_hash = digest_from_hex(item.at("prev_hash").get<std::string>());
        out.push_back(std::move(r));
    }
    return out;
}

QueryOutcome query_notaries(const std::vector<std::string>& base_urls,
                            const std::string& onion_address,
                            std::optional<std::size_t> quorum_k) {
    QueryOutcome outcome;
    std::vector<NotaryReport> reports;
    for (const auto& base : base_urls) {
        NotaryAnswer answer;
        answer.base_url = base;
        try {
            answer.head = fetch_head(base);
            answer.history = fetch_history(base, onion_address);
            answer.links_ok = true;
            for (const auto& r : answer.history) {
                if (chain_hash(r.prev_hash, canonical_encode(r.observation)) != r.entry_hash) {
                    answer.links_ok = false;
                    break;
                }
            }
            Bytes msg = head_message(answer.head.hash,
                                     static_cast<std::uint64_t>(answer.head.seq + 1));
            answer.head_ok = crypto::verify_detached(msg, answer.head.signature,
                                                     answer.head.notary_key);
            std::vector<Observation> observations;
            observations.reserve(answer.history.size());
            for (const auto& r : answer.history)
                observations.push_back(r.observation);
            answer.key_change = detect_key_change(observations);
            if (!observations.empty() && answer.links_ok && answer.head_ok)
                reports.push_back({base, observations.back()});
        } catch (const Error&) {
            answer.links_ok = false;
            answer.head_ok = false;
        }
        outcome.answers.push_back(std::move(answer));
    }
    if (reports.empty()) {
        outcome.quorum = {QuorumKind::NoQuorum, "", ""};
        return outcome;
    }
    std::size_t k = quorum_k.value_or(default_quorum(reports.size()));
    outcome.quorum = quorum_verdict(reports, k);
    return outcome;
}

} // namespace onionbind::notary
