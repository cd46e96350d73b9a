#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace rbac {

using Row = std::vector<std::string>;

// One fact: `relation(field1,field2,...)`. Ordering is by relation name, then
// lexicographic on the field strings.
struct Tuple {
  std::string relation;
  Row fields;

  auto operator<=>(const Tuple&) const = default;
  bool operator==(const Tuple&) const = default;
};

/// True for a usable entity/symbol name: non-empty, no whitespace and none of
/// the characters the line formats reserve (`#`, `,`, `(`, `)`, `:`, `{`, `}`,
/// `=`).
bool is_valid_name(std::string_view name);

/// True for a non-empty run of ASCII digits.
bool is_natural(std::string_view text);
/// Value of a natural-number field; saturates instead of overflowing.
std::size_t to_natural(std::string_view text);

std::string format_tuple(const Tuple& tuple);
std::string format_tuple(std::string_view relation, const Row& fields);

/// Parses `rel(a,b)`; throws RbacError(PARSE_ERROR) on malformed text.
Tuple parse_tuple(std::string_view text);

}  // namespace rbac
