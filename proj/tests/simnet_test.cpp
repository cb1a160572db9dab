#include <doctest.h>

#include "onionbind/errors.hpp"
#include "onionbind/loopback.hpp"
#include "onionbind/simnet.hpp"
#include "testutil.hpp"

using namespace onionbind;
using namespace onionbind::simnet;

namespace {

struct Fixture {
    SimNetwork net;
    onionid::ServiceIdentity service = testutil::identity_from(200);
    onionid::OnionAddress onion = onionid::derive_onion_address(service.public_key);

    Fixture() {
        net.register_site("paper.example", "/page", "clearnet body");
        net.register_site(onion, "/page", "onion body", service);
    }

    Url onion_url(const std::string& path = "/page") const {
        return Url::parse("http://" + onion.to_string() + path);
    }
    Url gateway_url(const std::string& path = "/page") const {
        return Url::parse("https://" + onion.label() + std::string(kTor2webSuffix) + path);
    }
};

} // namespace

TEST_CASE("registering an onion site requires the matching identity") {
    SimNetwork net;
    auto right = testutil::identity_from(1);
    auto wrong = testutil::identity_from(2);
    auto address = onionid::derive_onion_address(right.public_key);
    CHECK_THROWS_WITH_AS(net.register_site(address, "/", "body", wrong),
                         doctest::Contains("AddressKeyMismatch"), Error);
    net.register_site(address, "/", "body", right);
    CHECK(net.lookup_service_key(address) == right.public_key);
}

TEST_CASE("onion circuit fetch authenticates the service key") {
    Fixture fx;
    Document doc = fx.net.fetch(fx.onion_url(), Channel::OnionCircuit);
    CHECK(doc.body == "onion body");
    CHECK(doc.fetched_over == Channel::OnionCircuit);
    REQUIRE(doc.authenticated_service_key.has_value());
    CHECK(onionid::derive_onion_address(*doc.authenticated_service_key) == fx.onion);
}

TEST_CASE("direct fetch returns clearnet documents without a key") {
    Fixture fx;
    Document doc = fx.net.fetch(Url::parse("http://paper.example/page"), Channel::Direct);
    CHECK(doc.body == "clearnet body");
    CHECK_FALSE(doc.authenticated_service_key.has_value());
}

TEST_CASE("channel reachability rules are enforced") {
    Fixture fx;
    CHECK_THROWS_WITH_AS(fx.net.fetch(fx.onion_url(), Channel::Direct),
                         doctest::Contains("ChannelMismatch"), Error);
    CHECK_THROWS_AS(fx.net.fetch(Url::parse("http://paper.example/page"), Channel::OnionCircuit),
                    Error);
    CHECK_THROWS_AS(fx.net.fetch(fx.gateway_url(), Channel::Direct), Error);
    CHECK_THROWS_AS(fx.net.fetch(fx.onion_url(), Channel::Tor2webProxy), Error);
}

TEST_CASE("missing documents and unknown services are NotFound") {
    Fixture fx;
    CHECK_THROWS_WITH_AS(fx.net.fetch(fx.onion_url("/absent"), Channel::OnionCircuit),
                         doctest::Contains("NotFound"), Error);
    CHECK_THROWS_AS(fx.net.fetch(Url::parse("http://paper.example/absent"), Channel::Direct),
                    Error);
    auto unknown = onionid::derive_onion_address(testutil::identity_from(9).public_key);
    CHECK_THROWS_AS(fx.net.fetch(Url::parse("http://" + unknown.to_string() + "/"),
                                 Channel::OnionCircuit),
                    Error);
    CHECK_THROWS_AS(fx.net.lookup_service_key(unknown), Error);
}

TEST_CASE("a directory override cannot pass the self-auth check") {
    Fixture fx;
    auto mallory = testutil::identity_from(666);
    fx.net.install_adversary(DirectoryOverride{fx.onion, mallory.public_key});
    CHECK(fx.net.lookup_service_key(fx.onion) == mallory.public_key);
    CHECK_THROWS_WITH_AS(fx.net.fetch(fx.onion_url(), Channel::OnionCircuit),
                         doctest::Contains("DirectorySelfAuthFailure"), Error);
    // the gateway performs the same check internally
    CHECK_THROWS_AS(fx.net.fetch(fx.gateway_url(), Channel::Tor2webProxy), Error);
}

TEST_CASE("overrides with a key that re-derives are invisible") {
    // Re-installing the honest key through the adversary hook changes nothing:
    // the check binds address to key, not to how the entry got there.
    Fixture fx;
    fx.net.install_adversary(DirectoryOverride{fx.onion, fx.service.public_key});
    CHECK(fx.net.fetch(fx.onion_url(), Channel::OnionCircuit).body == "onion body");
}

TEST_CASE("in-transit tampering rewrites direct fetches only") {
    Fixture fx;
    fx.net.install_adversary(TamperInTransit{
        "paper.example", [](std::string body) { return body + " [tampered]"; }});
    CHECK(fx.net.fetch(Url::parse("http://paper.example/page"), Channel::Direct).body ==
          "clearnet body [tampered]");
    // the onion circuit is not a tamperable hop
    CHECK(fx.net.fetch(fx.onion_url(), Channel::OnionCircuit).body == "onion body");
}

TEST_CASE("gateway tampering reaches tor2web readers undetected at this layer") {
    Fixture fx;
    std::string gateway_host = fx.onion.label() + std::string(kTor2webSuffix);
    fx.net.install_adversary(
        TamperInTransit{gateway_host, [](std::string) { return std::string("evil page"); }});
    Document doc = fx.net.fetch(fx.gateway_url(), Channel::Tor2webProxy);
    CHECK(doc.body == "evil page");
    CHECK(doc.fetched_over == Channel::Tor2webProxy);
    CHECK_FALSE(doc.authenticated_service_key.has_value());
    // the same page over a real onion circuit is untouched
    CHECK(fx.net.fetch(fx.onion_url(), Channel::OnionCircuit).body == "onion body");
}

TEST_CASE("removing a document makes it NotFound") {
    Fixture fx;
    fx.net.install_adversary(RemoveDocument{fx.onion.to_string(), "/page"});
    CHECK_THROWS_WITH_AS(fx.net.fetch(fx.onion_url(), Channel::OnionCircuit),
                         doctest::Contains("NotFound"), Error);
    fx.net.install_adversary(RemoveDocument{"paper.example", "/page"});
    CHECK_THROWS_AS(fx.net.fetch(Url::parse("http://paper.example/page"), Channel::Direct), Error);
}

TEST_CASE("tor2web fetches never expose the service key") {
    Fixture fx;
    Document doc = fx.net.fetch(fx.gateway_url(), Channel::Tor2webProxy);
    CHECK(doc.body == "onion body");
    CHECK_FALSE(doc.authenticated_service_key.has_value());
}

TEST_CASE("loopback HTTP mode mirrors the in-memory semantics") {
    Fixture fx;
    SimHttpServer server(fx.net);
    int port = server.start(0);
    REQUIRE(port > 0);
    HttpNetwork http("http://127.0.0.1:" + std::to_string(port));

    SUBCASE("onion circuit with self-auth") {
        Document doc = http.fetch(fx.onion_url(), Channel::OnionCircuit);
        CHECK(doc.body == "onion body");
        REQUIRE(doc.authenticated_service_key.has_value());
        CHECK(onionid::derive_onion_address(*doc.authenticated_service_key) == fx.onion);
    }
    SUBCASE("direct and tor2web") {
        CHECK(http.fetch(Url::parse("http://paper.example/page"), Channel::Direct).body ==
              "clearnet body");
        Document doc = http.fetch(fx.gateway_url(), Channel::Tor2webProxy);
        CHECK(doc.body == "onion body");
        CHECK_FALSE(doc.authenticated_service_key.has_value());
    }
    SUBCASE("not found") {
        CHECK_THROWS_WITH_AS(http.fetch(fx.onion_url("/absent"), Channel::OnionCircuit),
                             doctest::Contains("NotFound"), Error);
    }
    SUBCASE("channel mismatch stays client-side") {
        CHECK_THROWS_WITH_AS(http.fetch(fx.onion_url(), Channel::Direct),
                             doctest::Contains("ChannelMismatch"), Error);
    }
    SUBCASE("directory override detected through the loopback too") {
        auto mallory = testutil::identity_from(666);
        fx.net.install_adversary(DirectoryOverride{fx.onion, mallory.public_key});
        CHECK_THROWS_WITH_AS(http.fetch(fx.onion_url(), Channel::OnionCircuit),
                             doctest::Contains("DirectorySelfAuthFailure"), Error);
        CHECK_THROWS_WITH_AS(http.fetch(fx.gateway_url(), Channel::Tor2webProxy),
                             doctest::Contains("DirectorySelfAuthFailure"), Error);
    }
    SUBCASE("tampering applies by host") {
        fx.net.install_adversary(TamperInTransit{
            "paper.example", [](std::string body) { return body + "!"; }});
        CHECK(http.fetch(Url::parse("http://paper.example/page"), Channel::Direct).body ==
              "clearnet body!");
        CHECK(http.fetch(fx.onion_url(), Channel::OnionCircuit).body == "onion body");
    }
    server.stop();
}
