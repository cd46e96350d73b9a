#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rbac/cli.hpp"

namespace rbac::cli {

/// Items of a `{a, b}` literal, trimmed. Throws PARSE_ERROR on empty items.
std::vector<std::string> split_set(std::string_view literal);

}  // namespace rbac::cli
