#include <cctype>
#include <set>

#include "rbac/rule_engine.hpp"

namespace rbac::rules {

namespace {

std::string term_text(const Term& term) {
  if (term.variable) return term.text;
  bool plain = !term.text.empty() && !std::isupper(static_cast<unsigned char>(term.text[0])) &&
               term.text[0] != '_';
  for (char c : term.text) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') plain = false;
  }
  return plain ? term.text : "\"" + term.text + "\"";
}

class Parser {
 public:
  Parser(std::string_view line, std::size_t line_no) : text_(line), line_(line_no) {}

  Rule rule() {
    Rule r;
    r.head = atom();
    skip_space();
    expect(":-", "':-'");
    do {
      r.body.push_back(atom());
      skip_space();
    } while (accept(','));
    expect(".", "',' or '.'");
    skip_space();
    if (pos_ < text_.size()) fail("end of line");
    return r;
  }

 private:
  [[noreturn]] void fail(std::string_view expected) const {
    throw RbacError(ErrorCode::ParseError, "line " + std::to_string(line_) + ", column " +
                                               std::to_string(pos_ + 1) + ": expected " +
                                               std::string(expected));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(std::string_view token, std::string_view what) {
    skip_space();
    if (text_.substr(pos_, token.size()) != token) fail(what);
    pos_ += token.size();
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           (static_cast<unsigned char>(c) >= 0x80);
  }

  std::string identifier(std::string_view what) {
    skip_space();
    std::size_t start = pos_;
    // A trailing '.' ends the rule rather than the identifier.
    while (pos_ < text_.size() && ident_char(text_[pos_])) {
      if (text_[pos_] == '.' && (pos_ + 1 >= text_.size() || !ident_char(text_[pos_ + 1]))) break;
      ++pos_;
    }
    if (pos_ == start) fail(what);
    return std::string(text_.substr(start, pos_ - start));
  }

  Term term() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '"') {
      std::size_t close = text_.find('"', pos_ + 1);
      if (close == std::string_view::npos) {
        pos_ = text_.size();
        fail("closing '\"'");
      }
      Term t{false, std::string(text_.substr(pos_ + 1, close - pos_ - 1))};
      pos_ = close + 1;
      return t;
    }
    std::string name = identifier("a variable or constant");
    bool variable = std::isupper(static_cast<unsigned char>(name[0])) || name[0] == '_';
    return Term{variable, std::move(name)};
  }

  Atom atom() {
    Atom a;
    a.relation = identifier("a relation name");
    expect("(", "'('");
    do {
      a.args.push_back(term());
    } while (accept(','));
    expect(")", "',' or ')'");
    return a;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '%' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace

std::string Atom::str() const {
  std::string out = relation + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += term_text(args[i]);
  }
  return out + ")";
}

std::string Rule::str() const {
  std::string out = head.str() + " :- ";
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (i) out += ", ";
    out += body[i].str();
  }
  return out + ".";
}

std::vector<Rule> parse_rules(std::string_view text) {
  std::vector<Rule> rules;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line = strip_comment(line);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    rules.push_back(Parser(line, line_no).rule());
  }
  return rules;
}

RuleProgram::RuleProgram(std::vector<Rule> rules, Arities edb) : rules_(std::move(rules)), edb_(std::move(edb)) {
  for (const auto& rule : rules_) {
    if (rule.body.empty()) {
      throw RbacError(ErrorCode::ParseError, rule.head.str() + " has no body");
    }
    const auto& name = rule.head.relation;
    if (edb_.contains(name)) {
      throw RbacError(ErrorCode::EdbHead, rule.str() + ": head " + name + " is a base relation");
    }
    auto [it, inserted] = idb_.emplace(name, rule.head.args.size());
    if (!inserted && it->second != rule.head.args.size()) {
      throw RbacError(ErrorCode::ArityMismatch, rule.str() + ": " + name + " has arity " +
                                                    std::to_string(it->second));
    }
  }
  for (const auto& rule : rules_) {
    std::set<std::string> bound;
    for (const auto& atom : rule.body) {
      const Arities* table = edb_.contains(atom.relation) ? &edb_ : &idb_;
      auto it = table->find(atom.relation);
      if (it == table->end()) {
        throw RbacError(ErrorCode::UnknownRelation, rule.str() + ": " + atom.relation);
      }
      if (it->second != atom.args.size()) {
        throw RbacError(ErrorCode::ArityMismatch, rule.str() + ": " + atom.relation + " has arity " +
                                                      std::to_string(it->second));
      }
      for (const auto& t : atom.args) {
        if (t.variable) bound.insert(t.text);
      }
    }
    for (const auto& t : rule.head.args) {
      if (t.variable && !bound.contains(t.text)) {
        throw RbacError(ErrorCode::UnboundHeadVariable, rule.str() + ": " + t.text);
      }
    }
  }
}

RuleProgram RuleProgram::with_rules(const std::vector<Rule>& more) const {
  auto all = rules_;
  all.insert(all.end(), more.begin(), more.end());
  return RuleProgram(std::move(all), edb_);
}

Arities rbac_edb() {
  Arities out;
  for (const auto& r : Schema::rbac()->relations()) out.emplace(r.name, r.fields.size());
  return out;
}

Database edb_from_snapshot(const Snapshot& snapshot) {
  Database db;
  for (const auto& r : snapshot.schema().relations()) {
    const auto& rows = snapshot.rows(r.name);
    db.emplace(r.name, Relation(rows.begin(), rows.end()));
  }
  return db;
}

std::string builtin_rules_text() {
  return "% reflexive-transitive closure of the role hierarchy\n"
         "geq(R,R) :- role(R).\n"
         "geq(R,J) :- rh(R,M), geq(M,J).\n"
         "authorized_roles(U,R) :- ua(U,A), geq(A,R).\n"
         "authorized_perms(R,Op,Ob) :- geq(R,J), pa(Op,Ob,J).\n"
         "% permissions reachable from a session's active roles\n"
         "active_perms(S,Op,Ob) :- session_role(S,R), authorized_perms(R,Op,Ob).\n";
}

RuleProgram builtin_library() { return RuleProgram(parse_rules(builtin_rules_text()), rbac_edb()); }

Database evaluate(const RuleProgram& program, const FactStore& store, StateVersion version) {
  return evaluate(program, edb_from_snapshot(*store.snapshot(version)));
}

Database evaluate_seminaive(const RuleProgram& program, const FactStore& store, StateVersion version) {
  return evaluate_seminaive(program, edb_from_snapshot(*store.snapshot(version)));
}

}  // namespace rbac::rules
