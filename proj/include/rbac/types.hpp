#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>

namespace rbac {

// An (operation, object) pair, written `op:obj`.
struct Permission {
  std::string operation;
  std::string object;

  auto operator<=>(const Permission&) const = default;
  bool operator==(const Permission&) const = default;

  std::string str() const { return operation + ":" + object; }
  /// Parses `op:obj`; throws RbacError(PARSE_ERROR).
  static Permission parse(std::string_view text);
};

using NameSet = std::set<std::string, std::less<>>;
using PermissionSet = std::set<Permission>;

enum class SodFlavor { Ssd, Dsd };

std::string_view to_string(SodFlavor flavor);

// Optional layers on top of core RBAC. Core is always on.
struct Components {
  bool hierarchy = true;
  bool ssd = true;
  bool dsd = true;

  bool operator==(const Components&) const = default;
  static Components all() { return {}; }
  static Components core_only() { return {false, false, false}; }
  /// e.g. "core,hierarchy,ssd,dsd"
  std::string str() const;
};

}  // namespace rbac
