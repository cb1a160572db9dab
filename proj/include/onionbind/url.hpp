#pragma once

#include <string>
#include <string_view>

namespace onionbind {

inline constexpr std::string_view kTor2webSuffix = ".tor2web.example";

// Just enough of a URL for this project: scheme, host, path. Ports stay part
// of the host string.
struct Url {
    std::string scheme; // "http" or "https"
    std::string host;
    std::string path;   // always begins with '/'

    static Url parse(std::string_view text); // throws Errc::InvalidUrl
    std::string to_string() const;
};

bool is_onion_host(std::string_view host);
bool is_tor2web_host(std::string_view host);

// "<label>.tor2web.example" -> "<label>"; empty if not a gateway host.
std::string tor2web_label(std::string_view host);

} // namespace onionbind
