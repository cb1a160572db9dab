#include <doctest.h>

#include <algorithm>
#include <set>

#include "onionbind/descriptor.hpp"
#include "onionbind/errors.hpp"
#include "testutil.hpp"

using namespace onionbind;
using namespace onionbind::descriptor;

namespace {

const TimePoint kIssued = parse_rfc3339("2026-08-01T00:00:00Z");

BindingDescriptor fixture_descriptor() {
    return build_descriptor("http://cupcakebridge.com",
                            onionid::OnionAddress::parse("eynfqhbqa5yecx6s.onion"), kIssued,
                            kDefaultLifetime);
}

// Frozen from the pre-build serialization oracle: the exact canonical bytes of
// the fixture descriptor before signing (placeholder signer), and their digest.
const std::string kFixtureCanonical =
    "onion-binding-version: 1\n"
    "clearnet: http://cupcakebridge.com\n"
    "onion: eynfqhbqa5yecx6s.onion\n"
    "issued: 2026-08-01T00:00:00Z\n"
    "expires: 2026-10-30T00:00:00Z\n"
    "signer: 0000000000000000000000000000000000000000000000000000000000000000\n";
const std::string kFixtureDigest =
    "666571099bedd19f215d2b82e0f366e176cd18f33a832458f74b8ad679c08f1f";

} // namespace

TEST_CASE("rfc3339 round-trip and the epoch oracle") {
    CHECK(to_unix(kIssued) == 1785542400); // frozen from an independent calendar
    CHECK(format_rfc3339(kIssued) == "2026-08-01T00:00:00Z");
    CHECK(format_rfc3339(from_unix(0)) == "1970-01-01T00:00:00Z");
    CHECK(parse_rfc3339("2099-12-31T23:59:59Z") == from_unix(4102444799));
    CHECK_THROWS_AS(parse_rfc3339("2026-08-01 00:00:00Z"), Error);
    CHECK_THROWS_AS(parse_rfc3339("2026-13-01T00:00:00Z"), Error);
    CHECK_THROWS_AS(parse_rfc3339("2026-02-29T00:00:00Z"), Error); // not a leap year
    CHECK_THROWS_AS(parse_rfc3339("2026-08-01T00:00:00+00:00"), Error);
}

TEST_CASE("build computes expiry from the lifetime") {
    BindingDescriptor d = fixture_descriptor();
    CHECK(d.version == 1);
    CHECK(format_rfc3339(d.expires_at) == "2026-10-30T00:00:00Z"); // 90 days later
    CHECK(d.signer_fingerprint == std::string(64, '0'));
    CHECK_FALSE(d.tls_fingerprint.has_value());
}

TEST_CASE("build rejects bad inputs") {
    auto onion = onionid::OnionAddress::parse("eynfqhbqa5yecx6s.onion");
    CHECK_THROWS_WITH_AS(
        build_descriptor("http://x.example", onion, kIssued, std::chrono::seconds{0}),
        doctest::Contains("InvalidLifetime"), Error);
    CHECK_THROWS_WITH_AS(
        build_descriptor("ftp://x.example", onion, kIssued, kDefaultLifetime),
        doctest::Contains("InvalidUrl"), Error);
    CHECK_THROWS_AS(build_descriptor("http://", onion, kIssued, kDefaultLifetime), Error);
    CHECK_THROWS_AS(build_descriptor("not a url", onion, kIssued, kDefaultLifetime), Error);
}

TEST_CASE("canonical encoding matches the fixture oracle byte for byte") {
    Bytes encoded = canonical_encode(fixture_descriptor());
    CHECK(to_string(encoded) == kFixtureCanonical);
    CHECK(crypto::sha256_hex(encoded) == kFixtureDigest);
}

TEST_CASE("tls fingerprint adds exactly one line") {
    BindingDescriptor with = fixture_descriptor();
    with.tls_fingerprint = std::string(64, 'a');
    Bytes a = canonical_encode(fixture_descriptor());
    Bytes b = canonical_encode(with);
    CHECK(b.size() == a.size() + std::string("tls-fingerprint: ").size() + 64 + 1);
    std::string text = to_string(b);
    CHECK(text.find("tls-fingerprint: ") != std::string::npos);
}

TEST_CASE("sign then verify accepts") {
    auto signer = testutil::identity_from(100);
    SignedBindingDescriptor s = sign_descriptor(fixture_descriptor(), signer);
    CHECK(s.descriptor.signer_fingerprint == crypto::fingerprint_hex(signer.public_key));
    CHECK(verify_signature(s) == VerifyStatus::Accept);
}

TEST_CASE("verification with a different key rejects") {
    auto signer = testutil::identity_from(100);
    auto other = testutil::identity_from(101);
    SignedBindingDescriptor s = sign_descriptor(fixture_descriptor(), signer);
    s.signer_public_key = other.public_key;
    CHECK(verify_signature(s) == VerifyStatus::BadSignature);
}

TEST_CASE("altered fingerprint field is a fingerprint mismatch") {
    auto signer = testutil::identity_from(100);
    // Signature is made over a payload whose signer field lies about the key.
    BindingDescriptor d = fixture_descriptor();
    d.signer_fingerprint = crypto::fingerprint_hex(testutil::identity_from(999).public_key);
    Bytes payload = canonical_encode(d);
    SignedBindingDescriptor s{
        .descriptor = d,
        .payload = payload,
        .signature = crypto::sign_detached(payload, signer.secret_key),
        .signer_public_key = signer.public_key,
    };
    CHECK(verify_signature(s) == VerifyStatus::FingerprintMismatch);
}

TEST_CASE("truncated signature bytes reject") {
    auto signer = testutil::identity_from(100);
    SignedBindingDescriptor s = sign_descriptor(fixture_descriptor(), signer);
    s.signature.resize(40);
    CHECK(verify_signature(s) == VerifyStatus::BadSignature);
    s.signature.clear();
    CHECK(verify_signature(s) == VerifyStatus::BadSignature);
}

TEST_CASE("single-byte payload flips always reject") {
    auto signer = testutil::identity_from(100);
    SignedBindingDescriptor s = sign_descriptor(fixture_descriptor(), signer);
    for (std::size_t pos = 0; pos < s.payload.size(); pos += 7) {
        SignedBindingDescriptor mutated = s;
        mutated.payload[pos] ^= 0x01;
        CHECK(verify_signature(mutated) == VerifyStatus::BadSignature);
    }
}

TEST_CASE("armor and parse are inverses") {
    auto signer = testutil::identity_from(100);
    BindingDescriptor d = fixture_descriptor();
    d.tls_fingerprint = std::string(64, 'c');
    SignedBindingDescriptor s = sign_descriptor(d, signer);
    std::string text = armor(s);
    SignedBindingDescriptor parsed = parse_armored(text);
    CHECK(parsed.descriptor == s.descriptor);
    CHECK(parsed.payload == s.payload);
    CHECK(parsed.signature == s.signature);
    CHECK(parsed.signer_public_key == s.signer_public_key);
    CHECK(armor(parsed) == text);
    CHECK(verify_signature(parsed) == VerifyStatus::Accept);
}

TEST_CASE("parse tolerates surrounding whitespace and CRLF transport") {
    auto signer = testutil::identity_from(100);
    SignedBindingDescriptor s = sign_descriptor(fixture_descriptor(), signer);
    std::string text = armor(s);

    SignedBindingDescriptor padded = parse_armored("\n\n  " + text + "\t\n");
    CHECK(verify_signature(padded) == VerifyStatus::Accept);

    std::string crlf;
    for (char c : text) {
        if (c == '\n')
            crlf += "\r\n";
        else
            crlf += c;
    }
    SignedBindingDescriptor from_crlf = parse_armored(crlf);
    CHECK(from_crlf.payload == s.payload);
    CHECK(verify_signature(from_crlf) == VerifyStatus::Accept);
}

TEST_CASE("a signature made over CRLF payload bytes does not verify") {
    auto signer = testutil::identity_from(100);
    BindingDescriptor d = fixture_descriptor();
    d.signer_fingerprint = crypto::fingerprint_hex(signer.public_key);
    std::string lf_payload = to_string(canonical_encode(d));
    std::string crlf_payload;
    for (char c : lf_payload) {
        if (c == '\n')
            crlf_payload += "\r\n";
        else
            crlf_payload += c;
    }
    Bytes crlf_bytes(crlf_payload.begin(), crlf_payload.end());
    Bytes sig = crypto::sign_detached(crlf_bytes, signer.secret_key);
    Bytes key_and_sig(signer.public_key.begin(), signer.public_key.end());
    key_and_sig.insert(key_and_sig.end(), sig.begin(), sig.end());
    std::string text = std::string(kBeginMarker) + "\n" + crlf_payload +
                       "signature: " + base64_encode(key_and_sig) + "\n" +
                       std::string(kEndMarker) + "\n";
    SignedBindingDescriptor parsed = parse_armored(text);
    CHECK(verify_signature(parsed) == VerifyStatus::BadSignature);
}

TEST_CASE("parse reports structural problems precisely") {
    auto signer = testutil::identity_from(100);
    SignedBindingDescriptor s = sign_descriptor(fixture_descriptor(), signer);
    std::string text = armor(s);

    SUBCASE("missing markers") {
        CHECK_THROWS_WITH_AS(parse_armored("hello"), doctest::Contains("MissingMarkers"), Error);
        CHECK_THROWS_AS(parse_armored(text.substr(10)), Error);
        std::string no_end = text.substr(0, text.find(kEndMarker));
        CHECK_THROWS_AS(parse_armored(no_end), Error);
        CHECK_THROWS_AS(parse_armored(""), Error);
    }
    SUBCASE("missing signature line") {
        std::string no_sig = text;
        std::size_t at = no_sig.find("signature: ");
        no_sig.erase(at, no_sig.find('\n', at) - at + 1);
        CHECK_THROWS_WITH_AS(parse_armored(no_sig), doctest::Contains("MissingField"), Error);
    }
    SUBCASE("missing payload field") {
        std::string no_onion = text;
        std::size_t at = no_onion.find("onion: ");
        no_onion.erase(at, no_onion.find('\n', at) - at + 1);
        CHECK_THROWS_WITH_AS(parse_armored(no_onion), doctest::Contains("MissingField"), Error);
    }
    SUBCASE("unknown field") {
        std::string extra = text;
        extra.insert(extra.find("signer: "), "color: green\n");
        CHECK_THROWS_WITH_AS(parse_armored(extra), doctest::Contains("UnknownField"), Error);
    }
    SUBCASE("duplicate field") {
        std::string dup = text;
        dup.insert(dup.find("onion: "), "clearnet: http://cupcakebridge.com\n");
        CHECK_THROWS_WITH_AS(parse_armored(dup), doctest::Contains("DuplicateField"), Error);
    }
    SUBCASE("bad base64") {
        std::string bad = text;
        std::size_t at = bad.find("signature: ") + 11;
        bad[at] = '!';
        CHECK_THROWS_WITH_AS(parse_armored(bad), doctest::Contains("BadBase64"), Error);
    }
    SUBCASE("unsupported version") {
        std::string v2 = text;
        std::size_t at = v2.find("onion-binding-version: 1");
        v2[at + std::string("onion-binding-version: ").size()] = '2';
        CHECK_THROWS_AS(parse_armored(v2), Error);
    }
}

TEST_CASE("reordered payload fields still parse but no longer verify") {
    auto signer = testutil::identity_from(100);
    SignedBindingDescriptor s = sign_descriptor(fixture_descriptor(), signer);

    std::vector<std::string> lines;
    std::string payload = to_string(s.payload);
    std::size_t start = 0;
    while (start < payload.size()) {
        std::size_t nl = payload.find('\n', start);
        lines.push_back(payload.substr(start, nl - start));
        start = nl + 1;
    }
    REQUIRE(lines.size() == 6);

    Bytes key_and_sig(s.signer_public_key.begin(), s.signer_public_key.end());
    key_and_sig.insert(key_and_sig.end(), s.signature.begin(), s.signature.end());
    std::string sig_line = "signature: " + base64_encode(key_and_sig);

    std::vector<std::size_t> order{0, 1, 2, 3, 4, 5};
    int accepted = 0, rejected = 0;
    do {
        std::string text = std::string(kBeginMarker) + "\n";
        for (std::size_t i : order)
            text += lines[i] + "\n";
        text += sig_line + "\n" + std::string(kEndMarker) + "\n";
        SignedBindingDescriptor parsed = parse_armored(text);
        bool identity_order = std::is_sorted(order.begin(), order.end());
        if (verify_signature(parsed) == VerifyStatus::Accept) {
            ++accepted;
            CHECK(identity_order);
        } else {
            ++rejected;
            CHECK_FALSE(identity_order);
        }
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK(accepted == 1);
    CHECK(rejected == 719);
}

TEST_CASE("canonical encoding is injective over random descriptor pairs") {
    std::mt19937_64 rng(2026);
    std::set<std::string> seen;
    for (int i = 0; i < 200; ++i) {
        auto service = testutil::identity_from(rng());
        BindingDescriptor d = build_descriptor(
            "http://host" + std::to_string(rng() % 100000) + ".example",
            onionid::derive_onion_address(service.public_key),
            from_unix(1700000000 + static_cast<std::int64_t>(rng() % 1000000)),
            std::chrono::seconds{1 + static_cast<std::int64_t>(rng() % 10000000)});
        seen.insert(to_string(canonical_encode(d)));
    }
    CHECK(seen.size() == 200);
}
