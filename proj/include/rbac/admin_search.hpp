#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rbac/engine.hpp"

namespace rbac::admin {

// The exact user-permission relation a decomposition must realize.
using AccessMatrix = std::set<std::pair<std::string, Permission>>;

struct RoleDecomposition {
  std::vector<std::string> roles;
  std::set<std::pair<std::string, std::string>> ua;      // (user, role)
  std::set<std::pair<Permission, std::string>> pa;       // (permission, role)
  std::set<std::pair<std::string, std::string>> rh;      // (senior, junior)

  std::size_t cost() const { return ua.size() + pa.size() + rh.size(); }
};

/// User-permission pairs the decomposition grants through the rh closure.
AccessMatrix induced_relation(const RoleDecomposition& decomposition);

enum class Objective { Roles, Edges };

struct MinimizeOptions {
  std::size_t role_cap = 6;
  Objective objective = Objective::Edges;
  // Names the fresh roles must avoid (e.g. roles already in the state).
  NameSet reserved;
};

/// Flat decomposition with the fewest roles; ties by |ua|+|pa|, then by the
/// sorted role contents. Throws PARSE_ERROR for an empty target.
RoleDecomposition minimize_roles(const AccessMatrix& target, const NameSet& reserved = {});

/// Decomposition with hierarchy minimizing |ua|+|pa|+|rh| (Objective::Edges)
/// or the role count then edges (Objective::Roles), over at most `role_cap`
/// roles. Throws CAP_EXCEEDED if no exact decomposition fits the cap.
RoleDecomposition minimize_assignments(const AccessMatrix& target, const MinimizeOptions& options = {});

/// The smallest unused `role_<k>` name.
std::string fresh_role_name(const NameSet& taken);

enum class ActionKind {
  AssignUser,
  DeassignUser,
  GrantPermission,
  RevokePermission,
  AddRole,
  DeleteRole,
  AddInheritance,
  DeleteInheritance,
};

std::string_view to_string(ActionKind kind);

struct AdminAction {
  ActionKind kind;
  std::vector<std::string> args;  // permissions are written op:obj

  /// Command text, e.g. `AssignUser alice role_1`. Plans order ties by it.
  std::string encode() const;
  bool operator==(const AdminAction&) const = default;
};

/// Runs the action as one engine command.
StateVersion apply_action(Engine& engine, const AdminAction& action);

struct AdminPlan {
  std::vector<AdminAction> steps;
  std::size_t cost() const { return steps.size(); }
};

struct PlanOptions {
  std::set<ActionKind> alphabet;
  // Actions other than AssignUser, DeassignUser and AddRole may only touch
  // roles the plan itself created (the senior role, for rh edges).
  bool confine_to_fresh = false;
  std::size_t fresh_role_cap = 2;
  std::size_t max_depth = 6;

  static PlanOptions grant_defaults();
  static PlanOptions revocation_defaults();
};

/// Shortest plan after which `user` holds every goal permission. Ties go to
/// the lexicographically smallest sequence of encodings. Throws NO_PLAN when
/// the reachable space holds no goal state and DEPTH_EXCEEDED when the depth
/// bound cut the search short.
AdminPlan shortest_grant_plan(const Engine& source, std::string_view user, const PermissionSet& goal,
                              const PlanOptions& options = PlanOptions::grant_defaults());

/// Shortest plan after which `user` holds none of the forbidden permissions.
AdminPlan shortest_revocation_plan(const Engine& source, std::string_view user, const PermissionSet& forbidden,
                                   const PlanOptions& options = PlanOptions::revocation_defaults());

}  // namespace rbac::admin
