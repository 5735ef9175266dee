#pragma once

#include <string>
#include <string_view>

namespace erprop::detail {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

/// Splits an absolute http(s) URL. Throws ValidationError otherwise.
Url split_url(std::string_view url);

/// Value of the named environment variable, or empty.
std::string env_or_empty(const std::string& name);

}  // namespace erprop::detail
