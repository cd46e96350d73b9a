#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbac/closure.hpp"
#include "rbac/fact_store.hpp"
#include "rbac/types.hpp"

namespace rbac {

/// Components enabled in a state; stored as `disabled(<component>)` tuples.
Components components_of(const Snapshot& snapshot);

// Read-only review functions over one committed version. No entity checks:
// unknown names yield empty results.
class PolicyView {
 public:
  explicit PolicyView(std::shared_ptr<const Snapshot> snapshot);

  const Snapshot& snapshot() const { return *snapshot_; }
  StateVersion version() const { return snapshot_->version(); }
  Components components() const { return components_; }
  const ClosureIndex& closure() const { return *closure_; }

  /// Core or hierarchical semantics, whichever the state enables.
  bool check_access(std::string_view session, const Permission& permission) const;
  bool check_access_core(std::string_view session, const Permission& permission) const;
  bool check_access_hierarchical(std::string_view session, const Permission& permission) const;

  NameSet users() const;
  NameSet roles() const;
  NameSet sessions() const;
  std::optional<std::string> session_owner(std::string_view session) const;

  NameSet assigned_users(std::string_view role) const;
  NameSet assigned_roles(std::string_view user) const;
  PermissionSet role_permissions(std::string_view role) const;
  PermissionSet user_permissions(std::string_view user) const;
  NameSet session_roles(std::string_view session) const;
  PermissionSet session_permissions(std::string_view session) const;
  std::map<std::string, std::size_t> count_users_per_role() const;
  std::map<std::string, std::size_t> count_roles_per_user() const;

  NameSet authorized_users(std::string_view role) const;
  NameSet authorized_roles(std::string_view user) const;
  PermissionSet authorized_permissions(std::string_view role) const;
  bool activation_eligible(std::string_view user, std::string_view role) const;
  /// Permissions a user can exercise under the enabled semantics.
  bool user_has_permission(std::string_view user, const Permission& permission) const;

  NameSet sod_sets(SodFlavor flavor) const;
  std::optional<SodFlavor> sod_flavor(std::string_view name) const;
  NameSet sod_set_roles(std::string_view name) const;
  std::size_t sod_set_cardinality(std::string_view name) const;

 private:
  std::shared_ptr<const Snapshot> snapshot_;
  std::shared_ptr<const ClosureIndex> closure_;
  Components components_;
};

// The RBAC engine: every administrative command runs as one fact-store
// transaction and either commits whole or leaves the state untouched.
class Engine {
 public:
  Engine();

  const FactStore& store() const { return store_; }
  FactStore& store() { return store_; }
  StateVersion version() const { return store_.version(); }
  PolicyView view() const { return PolicyView(store_.snapshot()); }
  PolicyView view(StateVersion version) const { return PolicyView(store_.snapshot(version)); }
  std::string dump() const { return dump_snapshot(*store_.snapshot()); }

  /// Copy holding only the current version.
  Engine fork() const;
  void set_constraint_checks(bool enabled) { store_.set_checks_enabled(enabled); }

  Components components() const { return components_of(*store_.snapshot()); }
  StateVersion set_components(const Components& components);
  /// Replaces the whole state with `tuples`.
  StateVersion load(const std::vector<Tuple>& tuples);

  // Core administrative commands.
  StateVersion add_user(std::string_view user);
  StateVersion delete_user(std::string_view user);
  StateVersion add_role(std::string_view role);
  StateVersion delete_role(std::string_view role);
  StateVersion add_operation(std::string_view operation);
  StateVersion add_object(std::string_view object);
  StateVersion assign_user(std::string_view user, std::string_view role);
  StateVersion deassign_user(std::string_view user, std::string_view role);
  StateVersion grant_permission(const Permission& permission, std::string_view role);
  StateVersion revoke_permission(const Permission& permission, std::string_view role);

  // Sessions.
  StateVersion create_session(std::string_view user, std::string_view session, const NameSet& roles);
  StateVersion delete_session(std::string_view user, std::string_view session);
  StateVersion add_active_role(std::string_view user, std::string_view session, std::string_view role);
  StateVersion drop_active_role(std::string_view user, std::string_view session, std::string_view role);
  bool check_access(std::string_view session, const Permission& permission) const;

  // Core review functions.
  NameSet assigned_users(std::string_view role) const;
  NameSet assigned_roles(std::string_view user) const;
  PermissionSet role_permissions(std::string_view role) const;
  PermissionSet user_permissions(std::string_view user) const;
  NameSet session_roles(std::string_view session) const;
  PermissionSet session_permissions(std::string_view session) const;
  std::map<std::string, std::size_t> count_users_per_role() const;
  std::map<std::string, std::size_t> count_roles_per_user() const;

  // Hierarchy; rejected with UNKNOWN_RELATION when the component is off.
  StateVersion add_inheritance(std::string_view ascendant, std::string_view descendant);
  StateVersion delete_inheritance(std::string_view ascendant, std::string_view descendant);
  StateVersion add_ascendant(std::string_view new_role, std::string_view descendant);
  StateVersion add_descendant(std::string_view ascendant, std::string_view new_role);
  NameSet authorized_users(std::string_view role) const;
  NameSet authorized_roles(std::string_view user) const;
  PermissionSet authorized_permissions(std::string_view role) const;
  /// `geq(senior,junior)` lines of the maintained closure.
  std::string closure_dump() const;

  // Separation of duty.
  StateVersion create_ssd_set(std::string_view name, const NameSet& roles, std::size_t cardinality);
  StateVersion create_dsd_set(std::string_view name, const NameSet& roles, std::size_t cardinality);
  StateVersion add_sod_role_member(std::string_view name, std::string_view role);
  StateVersion delete_sod_role_member(std::string_view name, std::string_view role);
  StateVersion set_sod_cardinality(std::string_view name, std::size_t cardinality);
  NameSet sod_sets(SodFlavor flavor) const;
  NameSet sod_set_roles(std::string_view name) const;
  std::size_t sod_set_cardinality(std::string_view name) const;

 private:
  explicit Engine(FactStore store);

  template <class Body>
  StateVersion mutate(Body&& body);

  void require_hierarchy() const;
  void require_flavor(SodFlavor flavor) const;
  SodFlavor require_sod_set(std::string_view name) const;
  StateVersion create_sod_set(SodFlavor flavor, std::string_view name, const NameSet& roles,
                              std::size_t cardinality);

  FactStore store_;
};

}  // namespace rbac
