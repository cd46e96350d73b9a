#include "rbac/tuple.hpp"

#include <cctype>
#include <charconv>
#include <limits>

#include "rbac/error.hpp"

namespace rbac {

bool is_valid_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) return false;
    switch (c) {
      case '#': case ',': case '(': case ')': case ':': case '{': case '}': case '=':
        return false;
      default:
        break;
    }
  }
  return true;
}

bool is_natural(std::string_view text) {
  if (text.empty()) return false;
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::size_t to_natural(std::string_view text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc::result_out_of_range) return std::numeric_limits<std::size_t>::max();
  return value;
}

std::string format_tuple(std::string_view relation, const Row& fields) {
  std::string out(relation);
  out += '(';
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += ')';
  return out;
}

std::string format_tuple(const Tuple& tuple) { return format_tuple(tuple.relation, tuple.fields); }

Tuple parse_tuple(std::string_view text) {
  auto open = text.find('(');
  if (open == std::string_view::npos || open == 0 || text.size() < open + 2 || text.back() != ')') {
    throw RbacError(ErrorCode::ParseError, "expected relation(field,...) but got '" + std::string(text) + "'");
  }
  Tuple tuple;
  tuple.relation = std::string(text.substr(0, open));
  if (!is_valid_name(tuple.relation)) {
    throw RbacError(ErrorCode::ParseError, "bad relation name '" + tuple.relation + "'");
  }
  std::string_view body = text.substr(open + 1, text.size() - open - 2);
  if (body.empty()) {
    throw RbacError(ErrorCode::ParseError, "empty field list in '" + std::string(text) + "'");
  }
  std::size_t start = 0;
  while (true) {
    auto comma = body.find(',', start);
    std::string_view field = body.substr(start, comma == std::string_view::npos ? body.npos : comma - start);
    if (!is_valid_name(field)) {
      throw RbacError(ErrorCode::ParseError, "bad field '" + std::string(field) + "' in '" + std::string(text) + "'");
    }
    tuple.fields.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return tuple;
}

}  // namespace rbac
