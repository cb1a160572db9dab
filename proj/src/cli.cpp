#include "onionbind/cli.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "onionbind/descriptor.hpp"
#include "onionbind/errors.hpp"
#include "onionbind/loopback.hpp"
#include "onionbind/notaryd.hpp"
#include "onionbind/verifier.hpp"

namespace onionbind::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::string store_path;
    std::string format = "text";
};

bool machine(const Globals& g) {
    return g.format == "machine";
}

fs::path default_store_path() {
    const char* xdg = std::getenv("XDG_CONFIG_HOME");
    if (xdg && *xdg)
        return fs::path(xdg) / "onionbind" / "trust.store";
    const char* home = std::getenv("HOME");
    return fs::path(home && *home ? home : ".") / ".config" / "onionbind" / "trust.store";
}

fs::path resolve_store(const Globals& g) {
    if (!g.store_path.empty())
        return g.store_path;
    return default_store_path();
}

trust::TrustStore open_store(const Globals& g) {
    return trust::TrustStore::load_or_empty(resolve_store(g));
}

void save_store(const Globals& g, const trust::TrustStore& store) {
    fs::path path = resolve_store(g);
    fs::create_directories(path.parent_path());
    store.save(path);
}

void write_private_file(const fs::path& path, const std::string& content) {
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (fd < 0)
        throw Error(Errc::IoError, "cannot create " + path.string());
    ssize_t written = ::write(fd, content.data(), content.size());
    ::close(fd);
    if (written != static_cast<ssize_t>(content.size()))
        throw Error(Errc::IoError, "short write to " + path.string());
}

void save_identity(const fs::path& path, const onionid::ServiceIdentity& id) {
    std::ostringstream out;
    out << "onion-signing-key-version: 1\n"
        << "public-key: " << to_hex({id.public_key.data(), id.public_key.size()}) << '\n'
        << "secret-key: " << to_hex({id.secret_key.data(), id.secret_key.size()}) << '\n'
        << "address: " << onionid::derive_onion_address(id.public_key).to_string() << '\n';
    write_private_file(path, out.str());
}

std::map<std::string, std::string> read_key_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f)
        throw Error(Errc::IoError, "cannot read " + path.string());
    std::map<std::string, std::string> fields;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::size_t sep = line.find(": ");
        if (sep == std::string::npos)
            continue;
        fields[line.substr(0, sep)] = line.substr(sep + 2);
    }
    return fields;
}

crypto::PublicKey load_public_key(const fs::path& path) {
    auto fields = read_key_file(path);
    if (!fields.contains("public-key"))
        throw Error(Errc::InvalidKey, "no public-key line in " + path.string());
    Bytes bytes = from_hex(fields["public-key"]);
    if (bytes.size() != crypto::kPublicKeyLen)
        throw Error(Errc::InvalidKey, "public key must be 32 bytes");
    crypto::PublicKey pk;
    std::copy(bytes.begin(), bytes.end(), pk.begin());
    return pk;
}

onionid::ServiceIdentity load_identity(const fs::path& path) {
    auto fields = read_key_file(path);
    if (!fields.contains("public-key") || !fields.contains("secret-key"))
        throw Error(Errc::InvalidKey, "key file needs public-key and secret-key lines");
    Bytes pub = from_hex(fields["public-key"]);
    Bytes sec = from_hex(fields["secret-key"]);
    if (pub.size() != crypto::kPublicKeyLen || sec.size() != crypto::kSecretKeyLen)
        throw Error(Errc::InvalidKey, "bad key lengths in " + path.string());
    onionid::ServiceIdentity id;
    std::copy(pub.begin(), pub.end(), id.public_key.begin());
    std::copy(sec.begin(), sec.end(), id.secret_key.begin());
    return id;
}

crypto::Seed seed_from_hex(const std::string& hex) {
    Bytes bytes = from_hex(hex);
    if (bytes.size() != crypto::kSeedLen)
        throw Error(Errc::InvalidSeed, "seed must be exactly 32 bytes of hex");
    crypto::Seed seed;
    std::copy(bytes.begin(), bytes.end(), seed.begin());
    return seed;
}

simnet::Channel channel_from_name(const std::string& name) {
    if (name == "onion")
        return simnet::Channel::OnionCircuit;
    if (name == "direct")
        return simnet::Channel::Direct;
    if (name == "tor2web")
        return simnet::Channel::Tor2webProxy;
    throw Error(Errc::UsageError, "channel must be onion, direct or tor2web");
}

void print_identity(std::ostream& out, const Globals& g, const onionid::ServiceIdentity& id,
                    const fs::path& key_file, std::optional<std::uint64_t> trials) {
    std::string address = onionid::derive_onion_address(id.public_key).to_string();
    std::string pub_hex = to_hex({id.public_key.data(), id.public_key.size()});
    if (machine(g)) {
        json j{{"address", address},
               {"public_key", pub_hex},
               {"fingerprint", crypto::fingerprint_hex(id.public_key)},
               {"secret_key_file", key_file.string()}};
        if (trials)
            j["trials"] = *trials;
        out << j.dump() << '\n';
    } else {
        out << "address: " << address << '\n'
            << "public-key: " << pub_hex << '\n'
            << "fingerprint: " << crypto::fingerprint_hex(id.public_key) << '\n'
            << "secret-key-file: " << key_file.string() << '\n';
        if (trials)
            out << "trials: " << *trials << '\n';
    }
}

void print_report(std::ostream& out, const Globals& g, const verifier::VerificationReport& report) {
    if (machine(g)) {
        out << verifier::report_json(report) << '\n';
        return;
    }
    out << "verdict: " << verifier::verdict_name(report.verdict) << '\n'
        << "assurance: " << verifier::assurance_name(report.assurance) << '\n'
        << "clearnet: " << report.clearnet_url << '\n'
        << "onion: " << report.onion_address << '\n'
        << "signer: " << report.signer_fingerprint << '\n'
        << "checked: " << format_rfc3339(report.checked_at) << '\n';
    for (const auto& check : report.evidence)
        out << "  [" << (check.pass ? "ok" : "FAIL") << "] " << check.check << ": " << check.detail
            << '\n';
}

std::vector<notary::Target> load_targets(const fs::path& path) {
    std::ifstream f(path);
    if (!f)
        throw Error(Errc::IoError, "cannot read targets file " + path.string());
    std::vector<notary::Target> targets;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream fields(line);
        std::string clearnet, onion;
        if (!(fields >> clearnet >> onion))
            throw Error(Errc::UsageError, "targets line needs '<clearnet-url> <onion-address>'");
        targets.push_back({clearnet, onionid::OnionAddress::parse(onion).to_string()});
    }
    return targets;
}

std::vector<std::string> split_comma(const std::string& list) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream stream(list);
    while (std::getline(stream, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

struct DemoPair {
    std::string clearnet_host;
    onionid::OnionAddress onion;
    onionid::ServiceIdentity signer;
};

DemoPair install_demo_pair(simnet::SimNetwork& net, trust::TrustStore& store,
                           const std::string& clearnet_host, TimePoint now) {
    onionid::ServiceIdentity service = onionid::generate_identity();
    onionid::ServiceIdentity signer = onionid::generate_identity();
    onionid::OnionAddress address = onionid::derive_onion_address(service.public_key);
    auto d = descriptor::build_descriptor("http://" + clearnet_host, address, now,
                                          descriptor::kDefaultLifetime);
    std::string armored = descriptor::armor(descriptor::sign_descriptor(d, signer));
    std::string well_known{descriptor::kWellKnownPath};
    net.register_site(clearnet_host, "/", "<html>demo site " + clearnet_host + "</html>");
    net.register_site(clearnet_host, well_known, armored);
    net.register_site(address, "/", "<html>demo onionsite</html>", service);
    net.register_site(address, well_known, armored, service);
    store.set_owner_trust(store.add_key(signer.public_key), trust::OwnerTrust::Ultimate);
    return {clearnet_host, address, signer};
}

int run_demo(const Globals& g, std::ostream& out, int port, int linger_seconds) {
    simnet::SimNetwork net;
    trust::TrustStore store;
    TimePoint now = now_utc();

    DemoPair honest = install_demo_pair(net, store, "demo-honest.example", now);
    DemoPair attacked = install_demo_pair(net, store, "demo-attacked.example", now);

    // The attack: the directory answers with a key that does not hash to the
    // advertised address.
    onionid::ServiceIdentity mallory = onionid::generate_identity();
    net.install_adversary(simnet::DirectoryOverride{attacked.onion, mallory.public_key});

    simnet::SimHttpServer server(net);
    int bound = server.start(port);
    simnet::HttpNetwork http("http://127.0.0.1:" + std::to_string(bound));

    auto honest_report = verifier::verify_pair(http, store, "http://" + honest.clearnet_host, now);
    auto attacked_report =
        verifier::verify_pair(http, store, "http://" + attacked.clearnet_host, now);

    int honest_code = verifier::verdict_exit_code(honest_report.verdict);
    int attacked_code = verifier::verdict_exit_code(attacked_report.verdict);
    bool ok = honest_report.verdict == verifier::VerdictKind::Authentic &&
              attacked_report.verdict == verifier::VerdictKind::AddressKeyMismatch;

    if (machine(g)) {
        out << verifier::report_json(honest_report) << '\n';
        out << verifier::report_json(attacked_report) << '\n';
        out << json{{"demo", ok ? "ok" : "failed"},
                    {"simnet", "http://127.0.0.1:" + std::to_string(bound)},
                    {"honest_exit", honest_code},
                    {"attacked_exit", attacked_code}}
                   .dump()
            << '\n';
    } else {
        out << "simnet listening at http://127.0.0.1:" << bound << "\n\n";
        out << "honest pair: http://" << honest.clearnet_host << "  <->  "
            << honest.onion.to_string() << '\n';
        print_report(out, g, honest_report);
        out << "  exit code for this verdict: " << honest_code << "\n\n";
        out << "attacked pair (directory override): http://" << attacked.clearnet_host
            << "  <->  " << attacked.onion.to_string() << '\n';
        print_report(out, g, attacked_report);
        out << "  exit code for this verdict: " << attacked_code << "\n\n";
        out << "demo: " << (ok ? "ok" : "FAILED") << '\n';
    }

    if (linger_seconds > 0) {
        if (!machine(g))
            out << "serving the demo simnet for " << linger_seconds
                << "s; try: onionbind verify http://" << honest.clearnet_host << " --simnet "
                << "http://127.0.0.1:" << bound << '\n';
        std::this_thread::sleep_for(std::chrono::seconds(linger_seconds));
    }
    server.stop();
    return ok ? 0 : 1;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"onion/clearnet site binding tool"};
    app.name("onionbind");
    app.require_subcommand(1);
    app.set_config("--config", "", "Configuration file (INI format)");

    Globals g;
    app.add_option("--store", g.store_path, "Trust store path")->envname("ONIONBIND_STORE");
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"text", "machine"}))
        ->capture_default_str();

    // keygen
    auto* keygen = app.add_subcommand("keygen", "Generate a service/signing keypair");
    keygen->fallthrough();
    std::string keygen_seed, keygen_out;
    keygen->add_option("--seed", keygen_seed, "32-byte hex seed for deterministic generation");
    keygen->add_option("--out", keygen_out, "Secret key file (default <label>.key)");

    // vanity
    auto* vanity = app.add_subcommand("vanity", "Search for an address with a chosen prefix");
    vanity->fallthrough();
    std::string vanity_prefix, vanity_seed, vanity_out;
    std::uint64_t vanity_max_trials = 10'000'000;
    unsigned vanity_jobs = 1;
    vanity->add_option("prefix", vanity_prefix, "Base32 prefix (a-z, 2-7)")->required();
    vanity->add_option("--max-trials", vanity_max_trials, "Give up after this many keys")
        ->capture_default_str();
    vanity->add_option("--jobs", vanity_jobs, "Parallel workers")->capture_default_str();
    vanity->add_option("--seed", vanity_seed, "32-byte hex seed for a deterministic search");
    vanity->add_option("--out", vanity_out, "Secret key file (default <label>.key)");

    // bind
    auto* bind = app.add_subcommand("bind", "Create a signed clearnet/onion binding descriptor");
    bind->fallthrough();
    std::string bind_clearnet, bind_onion, bind_key, bind_tls;
    int bind_days = 90;
    bind->add_option("--clearnet", bind_clearnet, "Clearnet URL")->required();
    bind->add_option("--onion", bind_onion, "Onion address")->required();
    bind->add_option("--key", bind_key, "Signer secret key file")->required();
    bind->add_option("--tls-fp", bind_tls, "TLS certificate fingerprint to bind (64 hex)");
    bind->add_option("--days", bind_days, "Descriptor lifetime in days")->capture_default_str();

    // trust
    auto* trust_cmd = app.add_subcommand("trust", "Manage the web-of-trust store");
    trust_cmd->fallthrough();
    trust_cmd->require_subcommand(1);
    auto* trust_add = trust_cmd->add_subcommand("add-key", "Add a public key to the store");
    trust_add->fallthrough();
    std::string trust_add_file;
    trust_add->add_option("file", trust_add_file, "Key file with a public-key line")->required();
    auto* trust_set = trust_cmd->add_subcommand("set", "Set owner trust for a key");
    trust_set->fallthrough();
    std::string trust_set_level, trust_set_fpr;
    trust_set->add_option("level", trust_set_level, "ultimate|full|marginal|none")->required();
    trust_set->add_option("fingerprint", trust_set_fpr, "Key fingerprint (64 hex)")->required();
    auto* trust_certify = trust_cmd->add_subcommand("certify", "Certify a key with your key");
    trust_certify->fallthrough();
    std::string certify_as, certify_subject, certify_key;
    trust_certify->add_option("--as", certify_as, "Certifier fingerprint")->required();
    trust_certify->add_option("--key", certify_key, "Certifier secret key file")->required();
    trust_certify->add_option("subject", certify_subject, "Subject fingerprint")->required();
    auto* trust_status = trust_cmd->add_subcommand("status", "Show a key's trust and validity");
    trust_status->fallthrough();
    std::string status_fpr;
    trust_status->add_option("fingerprint", status_fpr, "Key fingerprint (64 hex)")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "Verify a clearnet/onion pair");
    verify->fallthrough();
    std::string verify_target, verify_channel = "onion", verify_simnet;
    verify->add_option("target", verify_target, "Clearnet URL or onion address")->required();
    verify->add_option("--channel", verify_channel, "Channel for onion content")
        ->check(CLI::IsMember({"onion", "direct", "tor2web"}))
        ->capture_default_str();
    verify->add_option("--simnet", verify_simnet, "Loopback simnet base URL")
        ->envname("ONIONBIND_SIMNET");

    // notary serve / query
    auto* notary_cmd = app.add_subcommand("notary", "Run or query observation notaries");
    notary_cmd->fallthrough();
    notary_cmd->require_subcommand(1);
    auto* serve = notary_cmd->add_subcommand("serve", "Crawl targets and serve the log");
    serve->fallthrough();
    std::string serve_targets, serve_simnet, serve_key, serve_log_dir;
    int serve_port = 0;
    unsigned serve_interval = 10;
    int serve_run_seconds = 0;
    serve->add_option("--targets", serve_targets, "File of '<clearnet-url> <onion>' lines")
        ->required();
    serve->add_option("--port", serve_port, "Listen port (0 picks a free one)")
        ->capture_default_str();
    serve->add_option("--interval", serve_interval, "Seconds between crawl cycles")
        ->capture_default_str();
    serve->add_option("--simnet", serve_simnet, "Loopback simnet base URL")
        ->envname("ONIONBIND_SIMNET");
    serve->add_option("--key", serve_key, "Notary secret key file (default: ephemeral)");
    serve->add_option("--log-dir", serve_log_dir, "Persist the log in this directory");
    serve->add_option("--run-seconds", serve_run_seconds,
                      "Stop after this many seconds (0 = run until interrupted)");
    std::string serve_port_file;
    serve->add_option("--port-file", serve_port_file,
                      "Write the bound port to this file once listening");

    auto* query = notary_cmd->add_subcommand("query", "Query notaries for an address history");
    query->fallthrough();
    std::string query_notaries_arg, query_onion;
    std::size_t query_quorum = 0;
    query->add_option("--notaries", query_notaries_arg, "Comma-separated notary base URLs")
        ->required();
    query->add_option("--onion", query_onion, "Onion address to ask about")->required();
    query->add_option("--quorum", query_quorum, "Agreement threshold (default: majority)");

    // demo
    auto* demo = app.add_subcommand("demo", "Stand up a loopback simnet and verify two pairs");
    demo->fallthrough();
    int demo_port = 0, demo_linger = 0;
    demo->add_option("--port", demo_port, "Simnet port (0 picks a free one)");
    demo->add_option("--linger", demo_linger, "Keep serving this many seconds after verifying");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("onionbind");
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (keygen->parsed()) {
            onionid::ServiceIdentity id = keygen_seed.empty()
                                              ? onionid::generate_identity()
                                              : [&] {
                                                    crypto::Seed s = seed_from_hex(keygen_seed);
                                                    return onionid::generate_identity(
                                                        ByteView{s.data(), s.size()});
                                                }();
            std::string label = onionid::derive_onion_address(id.public_key).label();
            fs::path key_file = keygen_out.empty() ? fs::path(label + ".key") : fs::path(keygen_out);
            save_identity(key_file, id);
            print_identity(out, g, id, key_file, std::nullopt);
            return 0;
        }

        if (vanity->parsed()) {
            std::optional<crypto::Seed> seed;
            if (!vanity_seed.empty())
                seed = seed_from_hex(vanity_seed);
            onionid::VanityResult found =
                onionid::vanity_search(vanity_prefix, vanity_max_trials, seed, vanity_jobs);
            std::string label = onionid::derive_onion_address(found.identity.public_key).label();
            fs::path key_file = vanity_out.empty() ? fs::path(label + ".key") : fs::path(vanity_out);
            save_identity(key_file, found.identity);
            print_identity(out, g, found.identity, key_file, found.trials);
            return 0;
        }

        if (bind->parsed()) {
            onionid::ServiceIdentity signer = load_identity(bind_key);
            onionid::OnionAddress address = onionid::OnionAddress::parse(bind_onion);
            std::optional<std::string> tls;
            if (!bind_tls.empty())
                tls = bind_tls;
            if (bind_days <= 0)
                throw Error(Errc::InvalidLifetime, "lifetime must be positive");
            auto d = descriptor::build_descriptor(bind_clearnet, address, now_utc(),
                                                  std::chrono::seconds{
                                                      static_cast<std::int64_t>(bind_days) * 86400},
                                                  std::move(tls));
            auto signed_desc = descriptor::sign_descriptor(d, signer);
            std::string armored = descriptor::armor(signed_desc);
            if (machine(g)) {
                out << json{{"armored", armored},
                            {"clearnet", signed_desc.descriptor.clearnet_url},
                            {"onion", signed_desc.descriptor.onion_address.to_string()},
                            {"signer_fingerprint", signed_desc.descriptor.signer_fingerprint},
                            {"expires", format_rfc3339(signed_desc.descriptor.expires_at)}}
                           .dump()
                    << '\n';
            } else {
                out << armored;
            }
            return 0;
        }

        if (trust_add->parsed()) {
            trust::TrustStore store = open_store(g);
            std::string fpr = store.add_key(load_public_key(trust_add_file));
            save_store(g, store);
            if (machine(g))
                out << json{{"fingerprint", fpr}}.dump() << '\n';
            else
                out << "fingerprint: " << fpr << '\n';
            return 0;
        }

        if (trust_set->parsed()) {
            trust::TrustStore store = open_store(g);
            store.set_owner_trust(trust_set_fpr, trust::owner_trust_from_name(trust_set_level));
            save_store(g, store);
            if (machine(g))
                out << json{{"fingerprint", trust_set_fpr}, {"owner_trust", trust_set_level}}.dump()
                    << '\n';
            else
                out << trust_set_fpr << ": owner trust " << trust_set_level << '\n';
            return 0;
        }

        if (trust_certify->parsed()) {
            trust::TrustStore store = open_store(g);
            onionid::ServiceIdentity certifier = load_identity(certify_key);
            if (crypto::fingerprint_hex(certifier.public_key) != certify_as)
                throw Error(Errc::UnknownKey, "--key does not match the --as fingerprint");
            store.certify(certifier, certify_subject);
            save_store(g, store);
            if (machine(g))
                out << json{{"certifier", certify_as}, {"subject", certify_subject}}.dump() << '\n';
            else
                out << certify_as << " certified " << certify_subject << '\n';
            return 0;
        }

        if (trust_status->parsed()) {
            trust::TrustStore store = open_store(g);
            const trust::KeyRecord* record = store.find(status_fpr);
            trust::Validity validity = store.key_validity(status_fpr);
            if (machine(g)) {
                json j{{"fingerprint", status_fpr},
                       {"known", record != nullptr},
                       {"validity", std::string(trust::validity_name(validity))}};
                if (record) {
                    j["owner_trust"] = std::string(trust::owner_trust_name(record->owner_trust));
                    j["certifications"] = record->certifications.size();
                }
                out << j.dump() << '\n';
            } else {
                out << "fingerprint: " << status_fpr << '\n'
                    << "known: " << (record ? "yes" : "no") << '\n'
                    << "validity: " << trust::validity_name(validity) << '\n';
                if (record) {
                    out << "owner-trust: " << trust::owner_trust_name(record->owner_trust) << '\n'
                        << "certifications: " << record->certifications.size() << '\n';
                }
            }
            return 0;
        }

        if (verify->parsed()) {
            if (verify_simnet.empty())
                throw Error(Errc::UsageError,
                            "verify needs --simnet URL (or ONIONBIND_SIMNET) pointing at a "
                            "loopback simnet, e.g. one started by 'demo --linger'");
            trust::TrustStore store = open_store(g);
            simnet::HttpNetwork net(verify_simnet);
            verifier::VerifyOptions options;
            options.onion_channel = channel_from_name(verify_channel);
            auto report = verifier::verify_pair(net, store, verify_target, now_utc(), options);
            print_report(out, g, report);
            return verifier::verdict_exit_code(report.verdict);
        }

        if (serve->parsed()) {
            if (serve_simnet.empty())
                throw Error(Errc::UsageError, "notary serve needs --simnet URL (or ONIONBIND_SIMNET)");
            trust::TrustStore store = open_store(g);
            onionid::ServiceIdentity identity =
                serve_key.empty() ? onionid::generate_identity() : load_identity(serve_key);
            std::vector<notary::Target> targets = load_targets(serve_targets);
            simnet::HttpNetwork net(serve_simnet);
            auto log = serve_log_dir.empty()
                           ? std::make_unique<notary::NotaryLog>(identity)
                           : std::make_unique<notary::NotaryLog>(identity, fs::path(serve_log_dir));
            notary::NotaryServer server(*log, net, store, std::move(targets),
                                        std::chrono::seconds(serve_interval));
            int port = server.start(serve_port);
            if (!serve_port_file.empty()) {
                std::ofstream pf(serve_port_file, std::ios::trunc);
                pf << port << '\n';
            }
            if (machine(g))
                out << json{{"listening", "http://127.0.0.1:" + std::to_string(port)},
                            {"notary_key", to_hex({identity.public_key.data(),
                                                   identity.public_key.size()})}}
                           .dump()
                    << '\n';
            else
                out << "notary listening at http://127.0.0.1:" << port << '\n';
            out.flush();
            if (serve_run_seconds > 0) {
                std::this_thread::sleep_for(std::chrono::seconds(serve_run_seconds));
            } else {
                while (true)
                    std::this_thread::sleep_for(std::chrono::seconds(1));
            }
            server.stop();
            return 0;
        }

        if (query->parsed()) {
            std::vector<std::string> urls = split_comma(query_notaries_arg);
            if (urls.empty())
                throw Error(Errc::UsageError, "--notaries needs at least one URL");
            std::string onion = onionid::OnionAddress::parse(query_onion).to_string();
            std::optional<std::size_t> k;
            if (query_quorum > 0)
                k = query_quorum;
            notary::QueryOutcome outcome = notary::query_notaries(urls, onion, k);
            if (machine(g)) {
                json answers = json::array();
                for (const auto& a : outcome.answers) {
                    json history = json::array();
                    for (const auto& r : a.history)
                        history.push_back({{"seq", r.observation.seq},
                                           {"verdict", std::string(verifier::verdict_name(
                                                           r.observation.verdict))},
                                           {"descriptor_digest", r.observation.descriptor_digest},
                                           {"signer_fingerprint", r.observation.signer_fingerprint}});
                    answers.push_back(
                        {{"notary", a.base_url},
                         {"links_ok", a.links_ok},
                         {"head_ok", a.head_ok},
                         {"key_change",
                          a.key_change.kind == notary::KeyChangeKind::NewService ? "NewService"
                          : a.key_change.kind == notary::KeyChangeKind::KeyChanged
                              ? "KeyChanged"
                              : "Stable"},
                         {"history", std::move(history)}});
                }
                out << json{{"onion", onion},
                            {"quorum", std::string(notary::quorum_kind_name(outcome.quorum.kind))},
                            {"descriptor_digest", outcome.quorum.descriptor_digest},
                            {"signer_fingerprint", outcome.quorum.signer_fingerprint},
                            {"notaries", std::move(answers)}}
                           .dump()
                    << '\n';
            } else {
                out << "onion: " << onion << '\n';
                for (const auto& a : outcome.answers) {
                    out << "notary " << a.base_url << ": " << a.history.size() << " observations"
                        << (a.links_ok ? "" : ", BROKEN CHAIN")
                        << (a.head_ok ? "" : ", BAD HEAD SIGNATURE");
                    if (a.key_change.kind == notary::KeyChangeKind::KeyChanged)
                        out << ", KEY CHANGED at seq " << a.key_change.at_seq;
                    else if (a.key_change.kind == notary::KeyChangeKind::NewService)
                        out << ", new service";
                    out << '\n';
                }
                out << "quorum: " << notary::quorum_kind_name(outcome.quorum.kind);
                if (outcome.quorum.kind == notary::QuorumKind::Agreed)
                    out << " on digest " << outcome.quorum.descriptor_digest << " signer "
                        << outcome.quorum.signer_fingerprint;
                out << '\n';
            }
            switch (outcome.quorum.kind) {
            case notary::QuorumKind::Agreed: return 0;
            case notary::QuorumKind::NoQuorum: return 10;
            case notary::QuorumKind::Conflict: return 11;
            }
            return 10;
        }

        if (demo->parsed())
            return run_demo(g, out, demo_port, demo_linger);
    } catch (const Error& e) {
        if (machine(g))
            err << json{{"error", e.what()}}.dump() << '\n';
        else
            err << "error: " << e.what() << '\n';
        return e.code() == Errc::UsageError ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    err << "error: no subcommand executed\n" << app.help();
    return 2;
}

} // namespace onionbind::cli
