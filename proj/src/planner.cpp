#include <algorithm>
#include <deque>
#include <functional>
#include <unordered_set>

#include "rbac/admin_search.hpp"

namespace rbac::admin {

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::AssignUser: return "AssignUser";
    case ActionKind::DeassignUser: return "DeassignUser";
    case ActionKind::GrantPermission: return "GrantPermission";
    case ActionKind::RevokePermission: return "RevokePermission";
    case ActionKind::AddRole: return "AddRole";
    case ActionKind::DeleteRole: return "DeleteRole";
    case ActionKind::AddInheritance: return "AddInheritance";
    case ActionKind::DeleteInheritance: return "DeleteInheritance";
  }
  return "?";
}

std::string AdminAction::encode() const {
  std::string out(to_string(kind));
  for (const auto& a : args) out += " " + a;
  return out;
}

StateVersion apply_action(Engine& engine, const AdminAction& a) {
  switch (a.kind) {
    case ActionKind::AssignUser: return engine.assign_user(a.args.at(0), a.args.at(1));
    case ActionKind::DeassignUser: return engine.deassign_user(a.args.at(0), a.args.at(1));
    case ActionKind::GrantPermission: return engine.grant_permission(Permission::parse(a.args.at(0)), a.args.at(1));
    case ActionKind::RevokePermission: return engine.revoke_permission(Permission::parse(a.args.at(0)), a.args.at(1));
    case ActionKind::AddRole: return engine.add_role(a.args.at(0));
    case ActionKind::DeleteRole: return engine.delete_role(a.args.at(0));
    case ActionKind::AddInheritance: return engine.add_inheritance(a.args.at(0), a.args.at(1));
    case ActionKind::DeleteInheritance: return engine.delete_inheritance(a.args.at(0), a.args.at(1));
  }
  throw RbacError(ErrorCode::ParseError, "unknown action");
}

PlanOptions PlanOptions::grant_defaults() {
  PlanOptions o;
  o.alphabet = {ActionKind::AssignUser, ActionKind::GrantPermission, ActionKind::AddRole, ActionKind::AddInheritance};
  o.confine_to_fresh = true;
  return o;
}

PlanOptions PlanOptions::revocation_defaults() {
  PlanOptions o;
  o.alphabet = {ActionKind::DeassignUser, ActionKind::RevokePermission, ActionKind::DeleteInheritance};
  o.fresh_role_cap = 0;
  return o;
}

namespace {

struct Node {
  std::optional<Engine> engine;
  std::size_t fresh_used;
  std::size_t parent;
  std::optional<AdminAction> action;
  std::size_t depth;
};

struct Problem {
  std::string user;
  PermissionSet perms;  // goal or forbidden permissions
  const PlanOptions& options;
  NameSet source_roles;
  std::function<bool(const PolicyView&)> goal;
};

std::vector<AdminAction> successors(const Problem& pb, const Node& node) {
  const PolicyView view = node.engine->view();
  const auto& opts = pb.options;
  auto allowed = [&](ActionKind k) { return opts.alphabet.contains(k); };
  auto fresh = [&](const std::string& role) { return !pb.source_roles.contains(role); };
  auto confined = [&](const std::string& role) { return !opts.confine_to_fresh || fresh(role); };
  const NameSet roles = view.roles();
  const NameSet assigned = view.assigned_roles(pb.user);

  std::vector<AdminAction> out;
  if (allowed(ActionKind::AssignUser)) {
    for (const auto& r : roles) {
      if (!assigned.contains(r)) out.push_back({ActionKind::AssignUser, {pb.user, r}});
    }
  }
  if (allowed(ActionKind::DeassignUser)) {
    for (const auto& r : assigned) out.push_back({ActionKind::DeassignUser, {pb.user, r}});
  }
  for (const auto& r : roles) {
    if (!confined(r)) continue;
    const PermissionSet granted = view.role_permissions(r);
    for (const auto& p : pb.perms) {
      if (allowed(ActionKind::GrantPermission) && !granted.contains(p)) {
        out.push_back({ActionKind::GrantPermission, {p.str(), r}});
      }
      if (allowed(ActionKind::RevokePermission) && granted.contains(p)) {
        out.push_back({ActionKind::RevokePermission, {p.str(), r}});
      }
    }
    if (allowed(ActionKind::DeleteRole)) out.push_back({ActionKind::DeleteRole, {r}});
  }
  if (allowed(ActionKind::AddRole) && node.fresh_used < opts.fresh_role_cap) {
    out.push_back({ActionKind::AddRole, {fresh_role_name(roles)}});
  }
  if (view.components().hierarchy) {
    const auto& edges = view.snapshot().rows(rel::kRh);
    if (allowed(ActionKind::AddInheritance)) {
      for (const auto& a : roles) {
        if (!confined(a)) continue;
        for (const auto& d : roles) {
          if (a != d && !edges.contains(Row{a, d})) out.push_back({ActionKind::AddInheritance, {a, d}});
        }
      }
    }
    if (allowed(ActionKind::DeleteInheritance)) {
      for (const auto& e : edges) {
        if (confined(e[0])) out.push_back({ActionKind::DeleteInheritance, {e[0], e[1]}});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const AdminAction& x, const AdminAction& y) { return x.encode() < y.encode(); });
  return out;
}

AdminPlan search(const Engine& source, Problem pb) {
  const PolicyView start = source.view();
  if (!start.users().contains(pb.user)) {
    throw RbacError(ErrorCode::UnknownEntity, "user " + pb.user + " does not exist");
  }
  for (const auto& p : pb.perms) {
    if (!source.store().contains(Tuple{std::string(rel::kOp), {p.operation}})) {
      throw RbacError(ErrorCode::UnknownEntity, "operation " + p.operation + " does not exist");
    }
    if (!source.store().contains(Tuple{std::string(rel::kObj), {p.object}})) {
      throw RbacError(ErrorCode::UnknownEntity, "object " + p.object + " does not exist");
    }
  }
  pb.source_roles = start.roles();
  if (pb.goal(start)) return {};

  auto key = [](const Node& n) { return std::to_string(n.fresh_used) + "\n" + n.engine->dump(); };
  std::vector<Node> nodes;
  nodes.push_back({source.fork(), 0, 0, std::nullopt, 0});
  std::unordered_set<std::string> seen{key(nodes[0])};
  std::deque<std::size_t> queue{0};
  bool cut = false;

  while (!queue.empty()) {
    const std::size_t at = queue.front();
    queue.pop_front();
    if (nodes[at].depth == pb.options.max_depth) {
      cut = true;
      continue;
    }
    for (const auto& action : successors(pb, nodes[at])) {
      Engine next = nodes[at].engine->fork();
      try {
        apply_action(next, action);
      } catch (const RbacError&) {
        continue;
      }
      const std::size_t fresh_used = nodes[at].fresh_used + (action.kind == ActionKind::AddRole ? 1 : 0);
      Node child{std::move(next), fresh_used, at, action, nodes[at].depth + 1};
      if (!seen.insert(key(child)).second) continue;
      const bool reached = pb.goal(child.engine->view());
      nodes.push_back(std::move(child));
      if (reached) {
        AdminPlan plan;
        for (std::size_t i = nodes.size() - 1; i != 0; i = nodes[i].parent) plan.steps.push_back(*nodes[i].action);
        std::reverse(plan.steps.begin(), plan.steps.end());
        return plan;
      }
      queue.push_back(nodes.size() - 1);
    }
    nodes[at].engine.reset();
  }
  if (cut) {
    throw RbacError(ErrorCode::DepthExceeded, "no plan within depth " + std::to_string(pb.options.max_depth));
  }
  throw RbacError(ErrorCode::NoPlan, "goal unreachable with the allowed actions");
}

}  // namespace

AdminPlan shortest_grant_plan(const Engine& source, std::string_view user, const PermissionSet& goal,
                              const PlanOptions& options) {
  Problem pb{std::string(user), goal, options, {}, {}};
  pb.goal = [&](const PolicyView& v) {
    return std::all_of(goal.begin(), goal.end(), [&](const Permission& p) { return v.user_has_permission(user, p); });
  };
  return search(source, std::move(pb));
}

AdminPlan shortest_revocation_plan(const Engine& source, std::string_view user, const PermissionSet& forbidden,
                                   const PlanOptions& options) {
  Problem pb{std::string(user), forbidden, options, {}, {}};
  pb.goal = [&](const PolicyView& v) {
    return std::none_of(forbidden.begin(), forbidden.end(),
                        [&](const Permission& p) { return v.user_has_permission(user, p); });
  };
  return search(source, std::move(pb));
}

}  // namespace rbac::admin
