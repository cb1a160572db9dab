#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace onionbind {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string to_string(ByteView b) {
    return {reinterpret_cast<const char*>(b.data()), b.size()};
}

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex); // throws Errc::BadHex

// Standard base64 with padding. Decoding is strict: canonical padding only and
// the unused trailing bits must be zero, so every textual mutation of an
// encoding either fails to decode or decodes to different bytes.
std::string base64_encode(ByteView data);
Bytes base64_decode(std::string_view text); // throws Errc::BadBase64

// RFC 4648 base32, lowercase alphabet a-z 2-7, unpadded. Input length must be
// a multiple of 5 bits worth of data (onion labels are exactly 80 bits).
std::string base32_encode(ByteView data);
Bytes base32_decode(std::string_view text); // strict lowercase; throws Errc::MalformedAddress

} // namespace onionbind
