#pragma once

// Reference implementations used to cross-check the engine. They read plain
// tuples and recompute everything from the definitions: no indexes, no
// incremental maintenance, no shared code with the engine's evaluation paths.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rbac/admin_search.hpp"
#include "rbac/fact_store.hpp"
#include "rbac/types.hpp"

namespace rbac::oracle {

using Pair = std::pair<std::string, std::string>;

struct SodSet {
  std::size_t cardinality = 0;
  std::set<std::string> roles;
};

// A policy state as plain sets.
struct State {
  std::set<std::string> users, roles, ops, objs;
  std::map<std::string, std::string> session_user;
  std::set<Pair> ua;                                    // (user, role)
  std::set<std::pair<Permission, std::string>> pa;      // (permission, role)
  std::set<Pair> rh;                                    // (senior, junior)
  std::set<Pair> session_role;                          // (session, role)
  std::map<std::string, SodSet> ssd, dsd;
  std::set<std::string> disabled;                       // hierarchy | ssd | dsd

  bool hierarchy() const { return !disabled.contains("hierarchy"); }

  static State from_tuples(const std::vector<Tuple>& tuples);
  static State from_snapshot(const Snapshot& snapshot);
};

/// Reflexive-transitive closure of `edges` over `roles` (Floyd–Warshall).
std::set<Pair> closure(const std::set<std::string>& roles, const std::set<Pair>& edges);

/// Unfolds the access definition: some active role of the session holds the
/// permission directly, or (hierarchical) through a junior.
bool check_access(const State& state, const std::string& session, const Permission& p, bool hierarchical);
bool check_access(const State& state, const std::string& session, const Permission& p);

struct Finding {
  std::string constraint;  // ssd:<name>, dsd:<name>, sod-cardinality:<name>, ...
  std::string subject;

  auto operator<=>(const Finding&) const = default;
};

/// Every violated constraint of the state, evaluated from scratch.
std::vector<Finding> constraints(const State& state);

/// Snapshot text of the state obtained by folding every recorded delta of
/// the store over the empty state, in version order.
std::string replay_deltas(const FactStore& store);

/// Plain snapshot formatter: sorted `rel(a,b)` lines.
std::string format_tuples(const std::set<Tuple>& tuples);

struct FlatOptimum {
  std::size_t roles = 0;
  std::size_t edges = 0;  // |ua| + |pa| among decompositions with that many roles
};

/// Fewest roles of an exact flat decomposition, by trying every ua/pa
/// assignment over k = 1, 2, ... roles.
std::optional<FlatOptimum> min_flat_decomposition(const admin::AccessMatrix& target, std::size_t max_roles);

/// Least |ua|+|pa|+|rh| over exact decompositions with at most `max_roles`
/// roles, by trying every pa assignment and every DAG on the roles.
std::optional<std::size_t> min_decomposition(const admin::AccessMatrix& target, std::size_t max_roles);

/// Least role count over exact decompositions (hierarchy allowed) and the
/// least |ua|+|pa|+|rh| at that count.
std::optional<FlatOptimum> min_roles_with_hierarchy(const admin::AccessMatrix& target, std::size_t max_roles);

struct PlanQuery {
  bool grant = true;  // false: revocation
  std::string user;
  PermissionSet perms;
  admin::PlanOptions options;
};

/// Shortest action sequence by iterative deepening over every sequence of
/// allowed actions, each checked against the constraints before descending.
/// Returns the encodings of the lexicographically first shortest plan, or
/// nullopt when none exists within the depth bound.
std::optional<std::vector<std::string>> shortest_plan(const State& source, const PlanQuery& query);

}  // namespace rbac::oracle
