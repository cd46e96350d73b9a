#pragma once

#include <string>
#include <string_view>

#include "rbac/engine.hpp"

namespace rbac {

template <class Body>
StateVersion Engine::mutate(Body&& body) {
  auto txn = store_.begin();
  body(txn);
  return store_.commit(txn);
}

namespace detail {

void require_name(std::string_view name);
/// UNKNOWN_ENTITY (UNKNOWN_SESSION for sessions) unless the entity exists.
void require_entity(const Transaction& txn, EntityKind kind, std::string_view name);
void require_entity(const Snapshot& snapshot, EntityKind kind, std::string_view name);
Components components_in(const Transaction& txn);
/// Roles the user may activate in the transaction's current view.
NameSet eligible_roles_in(const Transaction& txn, std::string_view user);
/// Drops active roles that are no longer activation-eligible.
void prune_sessions(Transaction& txn);
std::string session_owner_in(const Transaction& txn, std::string_view session);

}  // namespace detail
}  // namespace rbac
