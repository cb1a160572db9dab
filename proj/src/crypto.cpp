#include "onionbind/crypto.hpp"

#include <mutex>
#include <stdexcept>

#include <sodium.h>

namespace onionbind::crypto {

static_assert(kPublicKeyLen == crypto_sign_PUBLICKEYBYTES);
static_assert(kSecretKeyLen == crypto_sign_SECRETKEYBYTES);
static_assert(kSignatureLen == crypto_sign_BYTES);
static_assert(kSeedLen == crypto_sign_SEEDBYTES);
static_assert(kDigestLen == crypto_hash_sha256_BYTES);

void init() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0)
            throw std::runtime_error("libsodium initialization failed");
    });
}

Digest sha256(ByteView data) {
    init();
    Digest out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

std::string sha256_hex(ByteView data) {
    Digest d = sha256(data);
    return to_hex(ByteView{d.data(), d.size()});
}

void generate_keypair(PublicKey& pub, SecretKey& sec) {
    init();
    crypto_sign_keypair(pub.data(), sec.data());
}

void generate_keypair(PublicKey& pub, SecretKey& sec, const Seed& seed) {
    init();
    crypto_sign_seed_keypair(pub.data(), sec.data(), seed.data());
}

Bytes sign_detached(ByteView message, const SecretKey& sec) {
    init();
    Bytes sig(kSignatureLen);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), sec.data());
    return sig;
}

bool verify_detached(ByteView message, ByteView signature, const PublicKey& pub) {
    init();
    if (signature.size() != kSignatureLen)
        return false;
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                       pub.data()) == 0;
}

void random_bytes(std::uint8_t* out, std::size_t len) {
    init();
    randombytes_buf(out, len);
}

std::string fingerprint_hex(const PublicKey& pub) {
    return sha256_hex(ByteView{pub.data(), pub.size()});
}

} // namespace onionbind::crypto
