#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include <string>
#include <string_view>

#include "bnsfuzzy/error.hpp"

namespace bnsfuzzy::cli {

inline bool is_url(std::string_view s) {
    return s.starts_with("http://") || s.starts_with("https://");
}

/// Body of a GET request, following redirects. Non-200 responses are data errors.
inline std::string fetch_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    auto res = client.Get(path);
    if (!res) {
        throw DataError("download of '" + url + "' failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw DataError("download of '" + url + "' returned HTTP " + std::to_string(res->status));
    }
    return res->body;
}

}  // namespace bnsfuzzy::cli
