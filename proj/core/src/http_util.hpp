#pragma once

// Internal URL split shared by the HTTP-backed modules. Not installed.

#include <string>
#include <string_view>

#include "costaudit/errors.hpp"

namespace costaudit::detail {

struct SplitUrl {
    std::string base;  // scheme://host[:port], what httplib::Client wants
    std::string path;  // leading slash, "/" when absent
};

inline SplitUrl split_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw ValidationError("endpoint URL must carry a scheme: '" + std::string(url) + "'");
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) {
        return {std::string(url), "/"};
    }
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

}  // namespace costaudit::detail
