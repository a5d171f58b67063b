#pragma once

// Single include point for cpp-httplib so TLS support is configured once.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <string>
#include <string_view>

#include "sqleval/error.hpp"

namespace sqleval {

struct SplitUrl {
    std::string origin;       // scheme://host[:port]
    std::string path_prefix;  // possibly empty, no trailing slash
};

inline SplitUrl split_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos)
        raise(Errc::config, "base_url must be absolute: " + std::string(url));
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string_view::npos) {
        out.origin = std::string(url);
    } else {
        out.origin = std::string(url.substr(0, path_start));
        out.path_prefix = std::string(url.substr(path_start));
    }
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
    return out;
}

inline bool is_mock_url(std::string_view url) { return url.rfind("mock:", 0) == 0; }

// Path portion of a mock: URL, tolerating mock:dir and mock://dir forms.
inline std::string mock_url_path(std::string_view url) {
    std::string_view rest = url.substr(5);
    if (rest.rfind("//", 0) == 0) rest = rest.substr(2);
    return std::string(rest);
}

}  // namespace sqleval
