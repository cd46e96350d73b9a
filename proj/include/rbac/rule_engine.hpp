#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rbac/fact_store.hpp"

namespace rbac::rules {

struct Term {
  bool variable = false;
  std::string text;

  bool operator==(const Term&) const = default;
};

struct Atom {
  std::string relation;
  std::vector<Term> args;

  std::string str() const;
};

// head :- body1, ..., bodyN.  Positive literals only.
struct Rule {
  Atom head;
  std::vector<Atom> body;

  std::string str() const;
};

using Relation = std::set<Row>;
using Database = std::map<std::string, Relation, std::less<>>;
using Arities = std::map<std::string, std::size_t, std::less<>>;

// A validated positive Datalog program over a fixed set of base relations.
class RuleProgram {
 public:
  /// Throws UNKNOWN_RELATION, ARITY_MISMATCH, UNBOUND_HEAD_VARIABLE, EDB_HEAD,
  /// or PARSE_ERROR for a rule without a body.
  RuleProgram(std::vector<Rule> rules, Arities edb);

  const std::vector<Rule>& rules() const { return rules_; }
  const Arities& edb() const { return edb_; }
  const Arities& idb() const { return idb_; }

  RuleProgram with_rules(const std::vector<Rule>& more) const;

 private:
  std::vector<Rule> rules_;
  Arities edb_;
  Arities idb_;
};

/// One rule per line, `%` starts a comment. Identifiers starting with an
/// uppercase letter or `_` are variables; anything else, or a double-quoted
/// token, is a constant. Throws PARSE_ERROR with line and column.
std::vector<Rule> parse_rules(std::string_view text);

/// Base relations of the RBAC schema with their arities.
Arities rbac_edb();
Database edb_from_snapshot(const Snapshot& snapshot);

/// Least fixpoint by naive iteration: every round re-derives from all facts.
/// The result holds every idb relation, possibly empty.
Database evaluate(const RuleProgram& program, const Database& edb);
Database evaluate(const RuleProgram& program, const FactStore& store, StateVersion version);

/// Same fixpoint; each round joins at least one atom against the previous
/// round's new facts only.
Database evaluate_seminaive(const RuleProgram& program, const Database& edb);
Database evaluate_seminaive(const RuleProgram& program, const FactStore& store, StateVersion version);

/// geq, authorized_roles, authorized_perms and active_perms over the RBAC
/// schema, matching the engine's set-based definitions.
std::string builtin_rules_text();
RuleProgram builtin_library();

}  // namespace rbac::rules
