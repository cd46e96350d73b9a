#include <deque>

#include "engine_internal.hpp"
#include "rbac/constraints.hpp"

namespace rbac {
namespace detail {

void require_name(std::string_view name) {
  if (!is_valid_name(name)) throw RbacError(ErrorCode::InvalidName, "'" + std::string(name) + "' is not a valid name");
}

namespace {
[[noreturn]] void throw_unknown(EntityKind kind, std::string_view name) {
  throw RbacError(kind == EntityKind::Session ? ErrorCode::UnknownSession : ErrorCode::UnknownEntity,
                  std::string(to_string(kind)) + " " + std::string(name) + " does not exist");
}
}  // namespace

void require_entity(const Transaction& txn, EntityKind kind, std::string_view name) {
  if (!txn.entity_exists(kind, name)) throw_unknown(kind, name);
}

void require_entity(const Snapshot& snapshot, EntityKind kind, std::string_view name) {
  if (!snapshot.entity_exists(kind, name)) throw_unknown(kind, name);
}

Components components_in(const Transaction& txn) {
  Components c = Components::all();
  for (const auto& row : txn.rows(rel::kDisabled)) {
    if (row[0] == "hierarchy") c.hierarchy = false;
    if (row[0] == "ssd") c.ssd = false;
    if (row[0] == "dsd") c.dsd = false;
  }
  return c;
}

NameSet eligible_roles_in(const Transaction& txn, std::string_view user) {
  NameSet out;
  std::deque<std::string> queue;
  for (const auto& ua : txn.with_prefix(rel::kUa, {std::string(user)})) {
    if (out.insert(ua[1]).second) queue.push_back(ua[1]);
  }
  if (!components_in(txn).hierarchy) return out;
  while (!queue.empty()) {
    std::string cur = std::move(queue.front());
    queue.pop_front();
    for (const auto& edge : txn.with_prefix(rel::kRh, {cur})) {
      if (out.insert(edge[1]).second) queue.push_back(edge[1]);
    }
  }
  return out;
}

void prune_sessions(Transaction& txn) {
  for (const auto& session : txn.rows(rel::kSession)) {
    auto active = txn.with_prefix(rel::kSessionRole, {session[0]});
    if (active.empty()) continue;
    const NameSet eligible = eligible_roles_in(txn, session[1]);
    for (const auto& row : active) {
      if (!eligible.count(row[1])) txn.remove(rel::kSessionRole, row);
    }
  }
}

std::string session_owner_in(const Transaction& txn, std::string_view session) {
  auto rows = txn.with_prefix(rel::kSession, {std::string(session)});
  if (rows.empty()) {
    throw RbacError(ErrorCode::UnknownSession, "session " + std::string(session) + " does not exist");
  }
  return rows.front()[1];
}

}  // namespace detail

using namespace detail;

Engine::Engine() {
  store_.add_maintainer(closure_maintainer());
  constraints::register_checks(store_);
}

Engine::Engine(FactStore store) : store_(std::move(store)) {}

Engine Engine::fork() const { return Engine(store_.fork()); }

StateVersion Engine::set_components(const Components& components) {
  return mutate([&](Transaction& txn) {
    for (const auto& row : txn.rows(rel::kDisabled)) txn.remove(rel::kDisabled, row);
    if (!components.hierarchy) txn.insert(rel::kDisabled, {"hierarchy"});
    if (!components.ssd) txn.insert(rel::kDisabled, {"ssd"});
    if (!components.dsd) txn.insert(rel::kDisabled, {"dsd"});
  });
}

StateVersion Engine::load(const std::vector<Tuple>& tuples) {
  return mutate([&](Transaction& txn) { load_tuples(txn, tuples); });
}

// ---------------------------------------------------------------------------
// Entities

namespace {
void add_entity(Transaction& txn, std::string_view relation, EntityKind kind,
                        std::string_view name) {
  require_name(name);
  if (txn.entity_exists(kind, name)) {
    throw RbacError(ErrorCode::DuplicateEntity, std::string(to_string(kind)) + " " + std::string(name) +
                                                    " already exists");
  }
  txn.insert(relation, {std::string(name)});
}
}  // namespace

StateVersion Engine::add_user(std::string_view user) {
  return mutate([&](Transaction& txn) { add_entity(txn, rel::kUser, EntityKind::User, user); });
}

StateVersion Engine::add_role(std::string_view role) {
  return mutate([&](Transaction& txn) { add_entity(txn, rel::kRole, EntityKind::Role, role); });
}

StateVersion Engine::add_operation(std::string_view operation) {
  return mutate([&](Transaction& txn) { add_entity(txn, rel::kOp, EntityKind::Operation, operation); });
}

StateVersion Engine::add_object(std::string_view object) {
  return mutate([&](Transaction& txn) { add_entity(txn, rel::kObj, EntityKind::Object, object); });
}

StateVersion Engine::delete_user(std::string_view user) {
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::User, user);
    const std::string u(user);
    for (const auto& row : txn.with_prefix(rel::kUa, {u})) txn.remove(rel::kUa, row);
    for (const auto& session : txn.rows(rel::kSession)) {
      if (session[1] != u) continue;
      for (const auto& row : txn.with_prefix(rel::kSessionRole, {session[0]})) txn.remove(rel::kSessionRole, row);
      txn.remove(rel::kSession, session);
    }
    txn.remove(rel::kUser, {u});
  });
}

StateVersion Engine::delete_role(std::string_view role) {
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::Role, role);
    const std::string r(role);
    auto drop_where = [&](std::string_view relation, std::size_t field) {
      for (const auto& row : txn.rows(relation)) {
        if (row[field] == r) txn.remove(relation, row);
      }
    };
    drop_where(rel::kUa, 1);
    drop_where(rel::kPa, 2);
    drop_where(rel::kSessionRole, 1);
    drop_where(rel::kRh, 0);
    drop_where(rel::kRh, 1);
    drop_where(rel::kSsdRole, 1);
    drop_where(rel::kDsdRole, 1);
    txn.remove(rel::kRole, {r});
    prune_sessions(txn);
  });
}

// ---------------------------------------------------------------------------
// Assignments

StateVersion Engine::assign_user(std::string_view user, std::string_view role) {
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::User, user);
    require_entity(txn, EntityKind::Role, role);
    Row row{std::string(user), std::string(role)};
    if (txn.contains(rel::kUa, row)) {
      throw RbacError(ErrorCode::DuplicateAssignment, format_tuple(rel::kUa, row) + " already exists");
    }
    txn.insert(rel::kUa, std::move(row));
  });
}

StateVersion Engine::deassign_user(std::string_view user, std::string_view role) {
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::User, user);
    require_entity(txn, EntityKind::Role, role);
    Row row{std::string(user), std::string(role)};
    if (!txn.contains(rel::kUa, row)) {
      throw RbacError(ErrorCode::MissingAssignment, format_tuple(rel::kUa, row) + " does not exist");
    }
    txn.remove(rel::kUa, row);
    prune_sessions(txn);
  });
}

StateVersion Engine::grant_permission(const Permission& permission, std::string_view role) {
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::Operation, permission.operation);
    require_entity(txn, EntityKind::Object, permission.object);
    require_entity(txn, EntityKind::Role, role);
    Row row{permission.operation, permission.object, std::string(role)};
    if (txn.contains(rel::kPa, row)) {
      throw RbacError(ErrorCode::DuplicateAssignment, format_tuple(rel::kPa, row) + " already exists");
    }
    txn.insert(rel::kPa, std::move(row));
  });
}

StateVersion Engine::revoke_permission(const Permission& permission, std::string_view role) {
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::Operation, permission.operation);
    require_entity(txn, EntityKind::Object, permission.object);
    require_entity(txn, EntityKind::Role, role);
    Row row{permission.operation, permission.object, std::string(role)};
    if (!txn.contains(rel::kPa, row)) {
      throw RbacError(ErrorCode::MissingAssignment, format_tuple(rel::kPa, row) + " does not exist");
    }
    txn.remove(rel::kPa, row);
  });
}

// ---------------------------------------------------------------------------
// Sessions

namespace {
void require_owner(const Transaction& txn, std::string_view user, std::string_view session) {
  if (session_owner_in(txn, session) != user) {
    throw RbacError(ErrorCode::SessionOwnerMismatch,
                    "session " + std::string(session) + " is not owned by " + std::string(user));
  }
}

void require_eligible(const Transaction& txn, std::string_view user, std::string_view role) {
  if (!eligible_roles_in(txn, user).count(role)) {
    throw RbacError(ErrorCode::NotAuthorized,
                    "user " + std::string(user) + " may not activate role " + std::string(role));
  }
}
}  // namespace

StateVersion Engine::create_session(std::string_view user, std::string_view session, const NameSet& roles) {
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::User, user);
    require_name(session);
    if (txn.entity_exists(EntityKind::Session, session)) {
      throw RbacError(ErrorCode::DuplicateEntity, "session " + std::string(session) + " already exists");
    }
    for (const auto& role : roles) {
      require_entity(txn, EntityKind::Role, role);
      require_eligible(txn, user, role);
    }
    txn.insert(rel::kSession, {std::string(session), std::string(user)});
    for (const auto& role : roles) txn.insert(rel::kSessionRole, {std::string(session), role});
  });
}

StateVersion Engine::delete_session(std::string_view user, std::string_view session) {
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::User, user);
    require_owner(txn, user, session);
    for (const auto& row : txn.with_prefix(rel::kSessionRole, {std::string(session)})) {
      txn.remove(rel::kSessionRole, row);
    }
    txn.remove(rel::kSession, {std::string(session), std::string(user)});
  });
}

StateVersion Engine::add_active_role(std::string_view user, std::string_view session, std::string_view role) {
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::User, user);
    require_owner(txn, user, session);
    require_entity(txn, EntityKind::Role, role);
    Row row{std::string(session), std::string(role)};
    if (txn.contains(rel::kSessionRole, row)) {
      throw RbacError(ErrorCode::DuplicateAssignment, "role " + std::string(role) + " is already active in " +
                                                          std::string(session));
    }
    require_eligible(txn, user, role);
    txn.insert(rel::kSessionRole, std::move(row));
  });
}

StateVersion Engine::drop_active_role(std::string_view user, std::string_view session, std::string_view role) {
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::User, user);
    require_owner(txn, user, session);
    require_entity(txn, EntityKind::Role, role);
    Row row{std::string(session), std::string(role)};
    if (!txn.contains(rel::kSessionRole, row)) {
      throw RbacError(ErrorCode::MissingAssignment,
                      "role " + std::string(role) + " is not active in " + std::string(session));
    }
    txn.remove(rel::kSessionRole, row);
  });
}

bool Engine::check_access(std::string_view session, const Permission& permission) const {
  auto snap = store_.snapshot();
  require_entity(*snap, EntityKind::Session, session);
  require_entity(*snap, EntityKind::Operation, permission.operation);
  require_entity(*snap, EntityKind::Object, permission.object);
  return PolicyView(snap).check_access(session, permission);
}

// ---------------------------------------------------------------------------
// Review functions

NameSet Engine::assigned_users(std::string_view role) const {
  require_entity(*store_.snapshot(), EntityKind::Role, role);
  return view().assigned_users(role);
}

NameSet Engine::assigned_roles(std::string_view user) const {
  require_entity(*store_.snapshot(), EntityKind::User, user);
  return view().assigned_roles(user);
}

PermissionSet Engine::role_permissions(std::string_view role) const {
  require_entity(*store_.snapshot(), EntityKind::Role, role);
  return view().role_permissions(role);
}

PermissionSet Engine::user_permissions(std::string_view user) const {
  require_entity(*store_.snapshot(), EntityKind::User, user);
  return view().user_permissions(user);
}

NameSet Engine::session_roles(std::string_view session) const {
  require_entity(*store_.snapshot(), EntityKind::Session, session);
  return view().session_roles(session);
}

PermissionSet Engine::session_permissions(std::string_view session) const {
  require_entity(*store_.snapshot(), EntityKind::Session, session);
  return view().session_permissions(session);
}

std::map<std::string, std::size_t> Engine::count_users_per_role() const { return view().count_users_per_role(); }

std::map<std::string, std::size_t> Engine::count_roles_per_user() const { return view().count_roles_per_user(); }

}  // namespace rbac
