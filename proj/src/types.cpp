#include "rbac/types.hpp"

#include "rbac/error.hpp"
#include "rbac/tuple.hpp"

namespace rbac {

Permission Permission::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw RbacError(ErrorCode::ParseError, "expected op:obj but got '" + std::string(text) + "'");
  }
  Permission p{std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
  if (!is_valid_name(p.operation) || !is_valid_name(p.object)) {
    throw RbacError(ErrorCode::ParseError, "bad permission '" + std::string(text) + "'");
  }
  return p;
}

std::string_view to_string(SodFlavor flavor) { return flavor == SodFlavor::Ssd ? "SSD" : "DSD"; }

std::string Components::str() const {
  std::string out = "core";
  if (hierarchy) out += ",hierarchy";
  if (ssd) out += ",ssd";
  if (dsd) out += ",dsd";
  return out;
}

}  // namespace rbac
