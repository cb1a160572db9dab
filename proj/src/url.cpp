#include "onionbind/url.hpp"

#include "onionbind/errors.hpp"
#include "onionbind/onionid.hpp"

namespace onionbind {

namespace {

bool valid_host_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '.' || c == ':';
}

} // namespace

Url Url::parse(std::string_view text) {
    std::size_t scheme_end = text.find("://");
    if (scheme_end == std::string_view::npos)
        throw Error(Errc::InvalidUrl, "missing scheme");
    Url url;
    url.scheme = std::string(text.substr(0, scheme_end));
    if (url.scheme != "http" && url.scheme != "https")
        throw Error(Errc::InvalidUrl, "scheme must be http or https");
    std::string_view rest = text.substr(scheme_end + 3);
    std::size_t slash = rest.find('/');
    std::string_view host = slash == std::string_view::npos ? rest : rest.substr(0, slash);
    if (host.empty())
        throw Error(Errc::InvalidUrl, "empty host");
    for (char c : host)
        if (!valid_host_char(c))
            throw Error(Errc::InvalidUrl, "invalid character in host");
    url.host = std::string(host);
    url.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    for (char c : url.path)
        if (static_cast<unsigned char>(c) < 0x21)
            throw Error(Errc::InvalidUrl, "whitespace or control character in path");
    return url;
}

std::string Url::to_string() const {
    return scheme + "://" + host + path;
}

bool is_onion_host(std::string_view host) {
    return host.size() == onionid::kLabelLength + onionid::kOnionSuffix.size() &&
           host.ends_with(onionid::kOnionSuffix);
}

bool is_tor2web_host(std::string_view host) {
    return host.size() == onionid::kLabelLength + kTor2webSuffix.size() &&
           host.ends_with(kTor2webSuffix);
}

std::string tor2web_label(std::string_view host) {
    if (!is_tor2web_host(host))
        return {};
    return std::string(host.substr(0, onionid::kLabelLength));
}

} // namespace onionbind
