#include <cctype>
#include <map>

#include "cli_internal.hpp"

namespace rbac::cli {

namespace {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

class LineError {
 public:
  LineError(std::size_t line, std::size_t offset) : line_(line), offset_(offset) {}

  [[noreturn]] void fail(std::size_t column, std::string_view expected) const {
    throw RbacError(ErrorCode::ParseError, "line " + std::to_string(line_) + ", column " +
                                               std::to_string(column + offset_) + ": expected " +
                                               std::string(expected));
  }

 private:
  std::size_t line_;
  std::size_t offset_;
};

std::vector<Token> tokenize(std::string_view text, const LineError& err) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (text[i] == '{') {
      auto close = text.find('}', i);
      if (close == std::string_view::npos) err.fail(text.size() + 1, "'}'");
      i = close + 1;
    } else {
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    }
    out.push_back({std::string(text.substr(start, i - start)), start + 1});
  }
  return out;
}

// Argument shapes:
//   n name   p op:obj   s {names}   P {op:obj,...}   k natural
//   w ssd|dsd   f path   t target pairs (user {perms} ...)
const std::map<std::string, std::string, std::less<>>& signatures() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"AddUser", "n"},
      {"DeleteUser", "n"},
      {"AddRole", "n"},
      {"DeleteRole", "n"},
      {"AddOperation", "n"},
      {"AddObject", "n"},
      {"AssignUser", "nn"},
      {"DeassignUser", "nn"},
      {"GrantPermission", "pn"},
      {"RevokePermission", "pn"},
      {"CreateSession", "nns"},
      {"DeleteSession", "nn"},
      {"AddActiveRole", "nnn"},
      {"DropActiveRole", "nnn"},
      {"CheckAccess", "np"},
      {"AssignedUsers", "n"},
      {"AssignedRoles", "n"},
      {"RolePermissions", "n"},
      {"UserPermissions", "n"},
      {"SessionRoles", "n"},
      {"SessionPermissions", "n"},
      {"CountUsersPerRole", ""},
      {"CountRolesPerUser", ""},
      {"AddInheritance", "nn"},
      {"DeleteInheritance", "nn"},
      {"AddAscendant", "nn"},
      {"AddDescendant", "nn"},
      {"AuthorizedUsers", "n"},
      {"AuthorizedRoles", "n"},
      {"AuthorizedPermissions", "n"},
      {"ActivationEligible", "nn"},
      {"Closure", ""},
      {"CreateSsdSet", "nsk"},
      {"CreateDsdSet", "nsk"},
      {"AddSodRoleMember", "nn"},
      {"DeleteSodRoleMember", "nn"},
      {"SetSodCardinality", "nk"},
      {"SodSets", "w"},
      {"SodSetRoles", "n"},
      {"SodSetCardinality", "n"},
      {"MinimizeRoles", "t"},
      {"MinimizeAssignmentsWithHierarchy", "t"},
      {"GetRolesShortestPlan", "nP"},
      {"GetRevocationShortestPlan", "nP"},
      {"Scan", "nK"},
      {"Version", ""},
      {"LOAD", "f"},
  };
  return table;
}

const std::set<std::string, std::less<>> kMutations{
    "AddUser",          "DeleteUser",       "AddRole",          "DeleteRole",       "AddOperation",
    "AddObject",        "AssignUser",       "DeassignUser",     "GrantPermission",  "RevokePermission",
    "CreateSession",    "DeleteSession",    "AddActiveRole",    "DropActiveRole",   "AddInheritance",
    "DeleteInheritance", "AddAscendant",    "AddDescendant",    "CreateSsdSet",     "CreateDsdSet",
    "AddSodRoleMember", "DeleteSodRoleMember", "SetSodCardinality", "LOAD",
};

void check_set(const Token& tok, bool permissions, const LineError& err) {
  if (tok.text.front() != '{' || tok.text.back() != '}') {
    err.fail(tok.column, permissions ? "a permission set {op:obj,...}" : "a set {name,...}");
  }
  std::vector<std::string> items;
  try {
    items = split_set(tok.text);
  } catch (const RbacError&) {
    err.fail(tok.column, "non-empty set items");
  }
  if (permissions) {
    for (const auto& item : items) {
      try {
        Permission::parse(item);
      } catch (const RbacError&) {
        err.fail(tok.column, "a permission op:obj inside the set");
      }
    }
  }
}

void check_arg(char shape, const Token& tok, const LineError& err) {
  switch (shape) {
    case 'n':
    case 'f':
      if (tok.text.front() == '{') err.fail(tok.column, "a name");
      break;
    case 'p':
      try {
        Permission::parse(tok.text);
      } catch (const RbacError&) {
        err.fail(tok.column, "a permission op:obj");
      }
      break;
    case 's': check_set(tok, false, err); break;
    case 'P': check_set(tok, true, err); break;
    case 'k':
    case 'K':
      if (!is_natural(tok.text)) err.fail(tok.column, "a natural number");
      break;
    case 'w':
      if (tok.text != "ssd" && tok.text != "dsd") err.fail(tok.column, "ssd or dsd");
      break;
    default: break;
  }
}

void check_target(const std::vector<Token>& toks, const LineError& err) {
  if (toks.size() < 2) err.fail(toks.empty() ? 1 : toks.back().column, "user {op:obj,...} pairs");
  for (std::size_t i = 0; i < toks.size(); i += 2) {
    check_arg('n', toks[i], err);
    if (i + 1 == toks.size()) err.fail(toks[i].column + toks[i].text.size(), "a permission set after the user");
    check_arg('P', toks[i + 1], err);
  }
}

void check_pragma(const std::vector<Token>& args, const LineError& err, std::size_t end) {
  if (args.empty()) err.fail(end, "components, fresh-role-cap, plan-depth, role-cap or objective");
  const std::string& key = args[0].text;
  if (key == "components") {
    if (args.size() < 2) err.fail(end, "a component list");
    for (std::size_t i = 1; i < args.size(); ++i) {
      std::string_view rest = args[i].text;
      while (!rest.empty()) {
        auto comma = rest.find(',');
        auto item = rest.substr(0, comma);
        if (item != "core" && item != "hierarchy" && item != "ssd" && item != "dsd") {
          err.fail(args[i].column, "core, hierarchy, ssd or dsd");
        }
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
    }
    return;
  }
  if (key == "fresh-role-cap" || key == "plan-depth" || key == "role-cap") {
    if (args.size() != 2) err.fail(args.size() < 2 ? end : args[2].column, "one natural number");
    check_arg('k', args[1], err);
    return;
  }
  if (key == "objective") {
    if (args.size() != 2 || (args[1].text != "roles" && args[1].text != "edges")) {
      err.fail(args.size() < 2 ? end : args[1].column, "roles or edges");
    }
    return;
  }
  err.fail(args[0].column, "components, fresh-role-cap, plan-depth, role-cap or objective");
}

Command parse_plain(std::string_view text, std::size_t line, std::size_t offset);

Command parse_assert(std::string_view text, const std::vector<Token>& toks, std::size_t line, std::size_t offset) {
  const LineError err(line, offset);
  Command cmd;
  cmd.line = line;
  cmd.text = std::string(text);
  cmd.verb = "ASSERT";
  if (toks.size() < 2) err.fail(text.size() + 1, "a command to check");

  Assertion a;
  std::size_t inner_end = 0;  // token index where the inner command stops
  const std::size_t n = toks.size();
  if (toks[n - 1].text == "ok") {
    a.mode = Assertion::Mode::Ok;
    inner_end = n - 1;
  } else if (n >= 3 && (toks[n - 2].text == "count" || toks[n - 2].text == "cost" || toks[n - 2].text == "fails")) {
    const std::string& mode = toks[n - 2].text;
    a.mode = mode == "count" ? Assertion::Mode::Count : mode == "cost" ? Assertion::Mode::Cost : Assertion::Mode::Fails;
    a.expected = toks[n - 1].text;
    if (a.mode == Assertion::Mode::Fails) {
      if (!error_code_from_string(a.expected)) err.fail(toks[n - 1].column, "an error code");
    } else if (!is_natural(a.expected)) {
      err.fail(toks[n - 1].column, "a natural number");
    }
    inner_end = n - 2;
  } else {
    std::size_t eq = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (toks[i].text == "==") eq = i;
    }
    if (eq == 0) err.fail(text.size() + 1, "'== value', 'count N', 'cost N', 'fails CODE' or 'ok'");
    if (eq + 1 == n) err.fail(text.size() + 1, "an expected value after '=='");
    a.mode = Assertion::Mode::Equals;
    a.expected = std::string(text.substr(toks[eq + 1].column - 1));
    while (!a.expected.empty() && std::isspace(static_cast<unsigned char>(a.expected.back()))) a.expected.pop_back();
    inner_end = eq;
  }
  if (inner_end <= 1) err.fail(toks[inner_end].column, "a command to check");
  const std::size_t from = toks[1].column - 1;
  const std::size_t to = toks[inner_end - 1].column - 1 + toks[inner_end - 1].text.size();
  auto inner = parse_plain(text.substr(from, to - from), line, offset + from);
  if (inner.verb == "ASSERT") err.fail(toks[1].column, "a command other than ASSERT");
  a.inner = std::make_shared<const Command>(std::move(inner));
  cmd.assertion = std::move(a);
  return cmd;
}

Command parse_plain(std::string_view text, std::size_t line, std::size_t offset) {
  const LineError err(line, offset);
  const auto toks = tokenize(text, err);
  if (toks.empty()) err.fail(1, "a command");
  Command cmd;
  cmd.line = line;
  cmd.text = std::string(text);
  cmd.verb = toks[0].text;
  const std::vector<Token> args(toks.begin() + 1, toks.end());
  for (const auto& t : args) cmd.args.push_back(t.text);
  const std::size_t end = text.size() + 2;

  if (cmd.verb == "ASSERT") return parse_assert(text, toks, line, offset);
  if (cmd.verb == "PRAGMA") {
    check_pragma(args, err, end);
    return cmd;
  }
  if (cmd.verb == "DUMP") {
    if (args.size() > 1) err.fail(args[1].column, "at most one path");
    return cmd;
  }
  if (cmd.verb == "RULES") {
    if (args.empty()) err.fail(end, "load, add, eval, list or builtin");
    const std::string& sub = args[0].text;
    if (sub == "add") {
      if (args.size() < 2) err.fail(end, "a rule");
      // Keep the rule text verbatim.
      cmd.args = {"add", std::string(text.substr(args[1].column - 1))};
    } else if (sub == "load" || sub == "eval") {
      if (args.size() != 2) err.fail(args.size() < 2 ? end : args[2].column, sub == "load" ? "a path" : "a relation");
    } else if (sub == "list" || sub == "builtin") {
      if (args.size() != 1) err.fail(args[1].column, "end of line");
    } else {
      err.fail(args[0].column, "load, add, eval, list or builtin");
    }
    return cmd;
  }

  auto it = signatures().find(cmd.verb);
  if (it == signatures().end()) err.fail(toks[0].column, "a known verb");
  const std::string& sig = it->second;
  if (sig == "t") {
    check_target(args, err);
    return cmd;
  }
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i >= args.size() && sig[i] == 'K') break;  // optional trailing number
    if (i >= args.size()) err.fail(end, std::string("argument ") + std::to_string(i + 1) + " of " + cmd.verb);
    check_arg(sig[i], args[i], err);
  }
  if (args.size() > sig.size()) err.fail(args[sig.size()].column, "end of line");
  return cmd;
}

// Drops a trailing ` # comment`; names never contain '#'.
std::string_view strip_comment(std::string_view line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

std::vector<std::string> split_set(std::string_view literal) {
  std::string_view body = literal.substr(1, literal.size() - 2);
  std::vector<std::string> items;
  if (body.find_first_not_of(" \t") == std::string_view::npos) return items;
  while (true) {
    auto comma = body.find(',');
    std::string_view item = body.substr(0, comma);
    auto first = item.find_first_not_of(" \t");
    auto last = item.find_last_not_of(" \t");
    if (first == std::string_view::npos) throw RbacError(ErrorCode::ParseError, "empty set item");
    items.emplace_back(item.substr(first, last - first + 1));
    if (comma == std::string_view::npos) break;
    body = body.substr(comma + 1);
  }
  return items;
}

Command parse_command(std::string_view text, std::size_t line) {
  text = strip_comment(text);
  auto end = text.find_last_not_of(" \t\r");
  text = end == std::string_view::npos ? std::string_view{} : text.substr(0, end + 1);
  std::size_t lead = text.find_first_not_of(" \t");
  if (lead == std::string_view::npos) LineError(line, 0).fail(1, "a command");
  return parse_plain(text.substr(lead), line, lead);
}

std::vector<Command> parse_script(std::string_view text) {
  std::vector<Command> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    std::string_view body = strip_comment(line);
    if (body.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    out.push_back(parse_command(line, line_no));
  }
  return out;
}

bool is_mutation(const Command& command) {
  if (command.verb == "PRAGMA") return !command.args.empty() && command.args[0] == "components";
  return kMutations.contains(command.verb);
}

}  // namespace rbac::cli
