#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "onionbind/bytes.hpp"

namespace onionbind::crypto {

// The concrete scheme is Ed25519 with SHA-256 digests, both via libsodium.
// Everything above this header only assumes: 32-byte public keys, detached
// signatures, deterministic signing, and a 256-bit digest.

inline constexpr std::size_t kPublicKeyLen = 32;
inline constexpr std::size_t kSecretKeyLen = 64;
inline constexpr std::size_t kSignatureLen = 64;
inline constexpr std::size_t kDigestLen = 32;
inline constexpr std::size_t kSeedLen = 32;

using PublicKey = std::array<std::uint8_t, kPublicKeyLen>;
using SecretKey = std::array<std::uint8_t, kSecretKeyLen>;
using Digest = std::array<std::uint8_t, kDigestLen>;
using Seed = std::array<std::uint8_t, kSeedLen>;

void init();

Digest sha256(ByteView data);
std::string sha256_hex(ByteView data);

void generate_keypair(PublicKey& pub, SecretKey& sec);
void generate_keypair(PublicKey& pub, SecretKey& sec, const Seed& seed);

Bytes sign_detached(ByteView message, const SecretKey& sec);
bool verify_detached(ByteView message, ByteView signature, const PublicKey& pub);

void random_bytes(std::uint8_t* out, std::size_t len);

// 64 lowercase hex chars: the digest of the raw public key bytes.
std::string fingerprint_hex(const PublicKey& pub);

inline const std::string kZeroFingerprint(64, '0');

} // namespace onionbind::crypto
