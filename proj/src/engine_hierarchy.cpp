#include "engine_internal.hpp"

namespace rbac {

using namespace detail;

void Engine::require_hierarchy() const {
  if (!components().hierarchy) {
    throw RbacError(ErrorCode::UnknownRelation, "rh (hierarchy component is disabled)");
  }
}

namespace {

void add_edge(Transaction& txn, const std::string& asc, const std::string& desc) {
  Row row{asc, desc};
  if (txn.contains(rel::kRh, row)) {
    throw RbacError(ErrorCode::DuplicateEdge, format_tuple(rel::kRh, row) + " already exists");
  }
  if (asc == desc) {
    Violation v{"acyclic", {{std::string(rel::kRh), row}}, asc, {}, 0};
    throw RbacError(ErrorCode::CycleDetected, "rh(" + asc + "," + asc + ") is a self loop", std::move(v));
  }
  // Reject up front when desc already reaches asc; the closure maintainer
  // re-checks at commit.
  auto closure = txn.base().attachment<ClosureIndex>(ClosureIndex::kName);
  if (closure && closure->geq(desc, asc)) {
    Violation v{"acyclic", {{std::string(rel::kRh), row}}, asc, {}, 0};
    for (auto& t : hierarchy_path(txn.base(), desc, asc)) v.witness.push_back(std::move(t));
    throw RbacError(ErrorCode::CycleDetected, format_tuple(rel::kRh, row) + " closes a cycle", std::move(v));
  }
  txn.insert(rel::kRh, std::move(row));
}

}  // namespace

StateVersion Engine::add_inheritance(std::string_view ascendant, std::string_view descendant) {
  require_hierarchy();
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::Role, ascendant);
    require_entity(txn, EntityKind::Role, descendant);
    add_edge(txn, std::string(ascendant), std::string(descendant));
  });
}

StateVersion Engine::delete_inheritance(std::string_view ascendant, std::string_view descendant) {
  require_hierarchy();
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::Role, ascendant);
    require_entity(txn, EntityKind::Role, descendant);
    Row row{std::string(ascendant), std::string(descendant)};
    if (!txn.contains(rel::kRh, row)) {
      throw RbacError(ErrorCode::MissingEdge, format_tuple(rel::kRh, row) + " does not exist");
    }
    txn.remove(rel::kRh, row);
    prune_sessions(txn);
  });
}

StateVersion Engine::add_ascendant(std::string_view new_role, std::string_view descendant) {
  require_hierarchy();
  return mutate([&](Transaction& txn) {
    require_name(new_role);
    require_entity(txn, EntityKind::Role, descendant);
    if (txn.entity_exists(EntityKind::Role, new_role)) {
      throw RbacError(ErrorCode::DuplicateEntity, "role " + std::string(new_role) + " already exists");
    }
    txn.insert(rel::kRole, {std::string(new_role)});
    add_edge(txn, std::string(new_role), std::string(descendant));
  });
}

StateVersion Engine::add_descendant(std::string_view ascendant, std::string_view new_role) {
  require_hierarchy();
  return mutate([&](Transaction& txn) {
    require_name(new_role);
    require_entity(txn, EntityKind::Role, ascendant);
    if (txn.entity_exists(EntityKind::Role, new_role)) {
      throw RbacError(ErrorCode::DuplicateEntity, "role " + std::string(new_role) + " already exists");
    }
    txn.insert(rel::kRole, {std::string(new_role)});
    add_edge(txn, std::string(ascendant), std::string(new_role));
  });
}

NameSet Engine::authorized_users(std::string_view role) const {
  require_hierarchy();
  require_entity(*store_.snapshot(), EntityKind::Role, role);
  return view().authorized_users(role);
}

NameSet Engine::authorized_roles(std::string_view user) const {
  require_hierarchy();
  require_entity(*store_.snapshot(), EntityKind::User, user);
  return view().authorized_roles(user);
}

PermissionSet Engine::authorized_permissions(std::string_view role) const {
  require_hierarchy();
  require_entity(*store_.snapshot(), EntityKind::Role, role);
  return view().authorized_permissions(role);
}

std::string Engine::closure_dump() const {
  require_hierarchy();
  return view().closure().dump();
}

}  // namespace rbac
