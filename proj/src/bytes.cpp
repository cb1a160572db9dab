#include "onionbind/bytes.hpp"

#include <array>

#include "onionbind/errors.hpp"

namespace onionbind {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::array<std::int8_t, 256> make_base64_table() {
    std::array<std::int8_t, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 64; ++i)
        t[static_cast<unsigned char>(kBase64Alphabet[i])] = static_cast<std::int8_t>(i);
    return t;
}

const std::array<std::int8_t, 256> kBase64Table = make_base64_table();

constexpr char kBase32Alphabet[] = "abcdefghijklmnopqrstuvwxyz234567";

std::array<std::int8_t, 256> make_base32_table() {
    std::array<std::int8_t, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 32; ++i)
        t[static_cast<unsigned char>(kBase32Alphabet[i])] = static_cast<std::int8_t>(i);
    return t;
}

const std::array<std::int8_t, 256> kBase32Table = make_base32_table();

} // namespace

std::string to_hex(ByteView data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0)
        throw Error(Errc::BadHex, "odd number of hex digits");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]);
        int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0)
            throw Error(Errc::BadHex, "invalid hex digit").with_position(hi < 0 ? i : i + 1);
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

std::string base64_encode(ByteView data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        std::uint32_t n = data[i] << 16 | data[i + 1] << 8 | data[i + 2];
        out.push_back(kBase64Alphabet[n >> 18]);
        out.push_back(kBase64Alphabet[n >> 12 & 0x3f]);
        out.push_back(kBase64Alphabet[n >> 6 & 0x3f]);
        out.push_back(kBase64Alphabet[n & 0x3f]);
    }
    std::size_t rest = data.size() - i;
    if (rest == 1) {
        std::uint32_t n = data[i] << 16;
        out.push_back(kBase64Alphabet[n >> 18]);
        out.push_back(kBase64Alphabet[n >> 12 & 0x3f]);
        out.append("==");
    } else if (rest == 2) {
        std::uint32_t n = data[i] << 16 | data[i + 1] << 8;
        out.push_back(kBase64Alphabet[n >> 18]);
        out.push_back(kBase64Alphabet[n >> 12 & 0x3f]);
        out.push_back(kBase64Alphabet[n >> 6 & 0x3f]);
        out.push_back('=');
    }
    return out;
}

Bytes base64_decode(std::string_view text) {
    if (text.empty())
        return {};
    if (text.size() % 4 != 0)
        throw Error(Errc::BadBase64, "length not a multiple of 4");
    std::size_t pad = 0;
    if (text.back() == '=') {
        pad = 1;
        if (text.size() >= 2 && text[text.size() - 2] == '=')
            pad = 2;
    }
    Bytes out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::uint32_t n = 0;
        int chars = 4;
        bool last_quad = i + 4 == text.size();
        if (last_quad)
            chars = 4 - static_cast<int>(pad);
        for (int j = 0; j < 4; ++j) {
            char c = text[i + j];
            if (j >= chars) {
                if (c != '=')
                    throw Error(Errc::BadBase64, "padding expected").with_position(i + j);
                n <<= 6;
                continue;
            }
            std::int8_t v = kBase64Table[static_cast<unsigned char>(c)];
            if (v < 0)
                throw Error(Errc::BadBase64, "invalid base64 character").with_position(i + j);
            n = n << 6 | static_cast<std::uint32_t>(v);
        }
        out.push_back(static_cast<std::uint8_t>(n >> 16));
        if (!last_quad || pad < 2)
            out.push_back(static_cast<std::uint8_t>(n >> 8 & 0xff));
        if (!last_quad || pad < 1)
            out.push_back(static_cast<std::uint8_t>(n & 0xff));
        if (last_quad && pad > 0) {
            // Unused low bits of the final quantum must be zero, otherwise two
            // distinct encodings would decode to the same bytes.
            std::uint32_t dropped = pad == 2 ? (n & 0xffff) : (n & 0xff);
            if (dropped != 0)
                throw Error(Errc::BadBase64, "non-canonical trailing bits").with_position(i);
        }
    }
    return out;
}

std::string base32_encode(ByteView data) {
    std::string out;
    out.reserve((data.size() * 8 + 4) / 5);
    std::uint32_t buffer = 0;
    int bits = 0;
    for (std::uint8_t b : data) {
        buffer = buffer << 8 | b;
        bits += 8;
        while (bits >= 5) {
            bits -= 5;
            out.push_back(kBase32Alphabet[buffer >> bits & 0x1f]);
        }
    }
    if (bits > 0)
        out.push_back(kBase32Alphabet[buffer << (5 - bits) & 0x1f]);
    return out;
}

Bytes base32_decode(std::string_view text) {
    if (text.size() % 8 != 0 && text.size() * 5 % 8 != 0)
        throw Error(Errc::MalformedAddress, "base32 length does not pack to whole bytes");
    Bytes out;
    out.reserve(text.size() * 5 / 8);
    std::uint32_t buffer = 0;
    int bits = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        std::int8_t v = kBase32Table[static_cast<unsigned char>(text[i])];
        if (v < 0)
            throw Error(Errc::MalformedAddress, "invalid base32 character").with_position(i);
        buffer = buffer << 5 | static_cast<std::uint32_t>(v);
        bits += 5;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>(buffer >> bits & 0xff));
        }
    }
    return out;
}

} // namespace onionbind
