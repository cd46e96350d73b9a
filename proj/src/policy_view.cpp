#include "rbac/engine.hpp"

namespace rbac {

Components components_of(const Snapshot& snapshot) {
  Components c = Components::all();
  for (const auto& row : snapshot.rows(rel::kDisabled)) {
    if (row[0] == "hierarchy") c.hierarchy = false;
    if (row[0] == "ssd") c.ssd = false;
    if (row[0] == "dsd") c.dsd = false;
  }
  return c;
}

PolicyView::PolicyView(std::shared_ptr<const Snapshot> snapshot)
    : snapshot_(std::move(snapshot)),
      closure_(snapshot_->attachment<ClosureIndex>(ClosureIndex::kName)),
      components_(components_of(*snapshot_)) {
  if (!closure_) closure_ = ClosureIndex::build(*snapshot_);
}

bool PolicyView::check_access(std::string_view session, const Permission& permission) const {
  return components_.hierarchy ? check_access_hierarchical(session, permission)
                               : check_access_core(session, permission);
}

bool PolicyView::check_access_core(std::string_view session, const Permission& permission) const {
  for (const auto& row : snapshot_->with_prefix(rel::kSessionRole, {std::string(session)})) {
    if (snapshot_->contains(rel::kPa, {permission.operation, permission.object, row[1]})) return true;
  }
  return false;
}

bool PolicyView::check_access_hierarchical(std::string_view session, const Permission& permission) const {
  for (const auto& row : snapshot_->with_prefix(rel::kSessionRole, {std::string(session)})) {
    for (const auto& junior : closure_->juniors(row[1])) {
      if (snapshot_->contains(rel::kPa, {permission.operation, permission.object, junior})) return true;
    }
  }
  return false;
}

namespace {
NameSet first_fields(const RowSet& rows) {
  NameSet out;
  for (const auto& row : rows) out.insert(row[0]);
  return out;
}
}  // namespace

NameSet PolicyView::users() const { return first_fields(snapshot_->rows(rel::kUser)); }
NameSet PolicyView::roles() const { return first_fields(snapshot_->rows(rel::kRole)); }
NameSet PolicyView::sessions() const { return first_fields(snapshot_->rows(rel::kSession)); }

std::optional<std::string> PolicyView::session_owner(std::string_view session) const {
  auto range = snapshot_->with_prefix(rel::kSession, {std::string(session)});
  if (range.empty()) return std::nullopt;
  return (*range.begin())[1];
}

NameSet PolicyView::assigned_users(std::string_view role) const {
  NameSet out;
  for (const auto& row : snapshot_->rows(rel::kUa)) {
    if (row[1] == role) out.insert(row[0]);
  }
  return out;
}

NameSet PolicyView::assigned_roles(std::string_view user) const {
  NameSet out;
  for (const auto& row : snapshot_->with_prefix(rel::kUa, {std::string(user)})) out.insert(row[1]);
  return out;
}

PermissionSet PolicyView::role_permissions(std::string_view role) const {
  PermissionSet out;
  for (const auto& row : snapshot_->rows(rel::kPa)) {
    if (row[2] == role) out.insert({row[0], row[1]});
  }
  return out;
}

PermissionSet PolicyView::user_permissions(std::string_view user) const {
  PermissionSet out;
  for (const auto& role : assigned_roles(user)) out.merge(role_permissions(role));
  return out;
}

NameSet PolicyView::session_roles(std::string_view session) const {
  NameSet out;
  for (const auto& row : snapshot_->with_prefix(rel::kSessionRole, {std::string(session)})) out.insert(row[1]);
  return out;
}

PermissionSet PolicyView::session_permissions(std::string_view session) const {
  PermissionSet out;
  for (const auto& role : session_roles(session)) {
    out.merge(components_.hierarchy ? authorized_permissions(role) : role_permissions(role));
  }
  return out;
}

std::map<std::string, std::size_t> PolicyView::count_users_per_role() const {
  std::map<std::string, std::size_t> out;
  for (const auto& role : roles()) out[role] = 0;
  for (const auto& row : snapshot_->rows(rel::kUa)) ++out[row[1]];
  return out;
}

std::map<std::string, std::size_t> PolicyView::count_roles_per_user() const {
  std::map<std::string, std::size_t> out;
  for (const auto& user : users()) out[user] = 0;
  for (const auto& row : snapshot_->rows(rel::kUa)) ++out[row[0]];
  return out;
}

NameSet PolicyView::authorized_users(std::string_view role) const {
  NameSet out;
  for (const auto& senior : closure_->seniors(role)) out.merge(assigned_users(senior));
  return out;
}

NameSet PolicyView::authorized_roles(std::string_view user) const {
  NameSet out;
  for (const auto& role : assigned_roles(user)) {
    const auto& juniors = closure_->juniors(role);
    out.insert(juniors.begin(), juniors.end());
  }
  return out;
}

PermissionSet PolicyView::authorized_permissions(std::string_view role) const {
  PermissionSet out;
  for (const auto& junior : closure_->juniors(role)) out.merge(role_permissions(junior));
  return out;
}

bool PolicyView::activation_eligible(std::string_view user, std::string_view role) const {
  if (!components_.hierarchy) return snapshot_->contains(rel::kUa, {std::string(user), std::string(role)});
  for (const auto& assigned : assigned_roles(user)) {
    if (closure_->geq(assigned, role)) return true;
  }
  return false;
}

bool PolicyView::user_has_permission(std::string_view user, const Permission& permission) const {
  for (const auto& role : assigned_roles(user)) {
    if (components_.hierarchy) {
      for (const auto& junior : closure_->juniors(role)) {
        if (snapshot_->contains(rel::kPa, {permission.operation, permission.object, junior})) return true;
      }
    } else if (snapshot_->contains(rel::kPa, {permission.operation, permission.object, role})) {
      return true;
    }
  }
  return false;
}

NameSet PolicyView::sod_sets(SodFlavor flavor) const {
  return first_fields(snapshot_->rows(flavor == SodFlavor::Ssd ? rel::kSsd : rel::kDsd));
}

std::optional<SodFlavor> PolicyView::sod_flavor(std::string_view name) const {
  if (!snapshot_->with_prefix(rel::kSsd, {std::string(name)}).empty()) return SodFlavor::Ssd;
  if (!snapshot_->with_prefix(rel::kDsd, {std::string(name)}).empty()) return SodFlavor::Dsd;
  return std::nullopt;
}

NameSet PolicyView::sod_set_roles(std::string_view name) const {
  NameSet out;
  auto flavor = sod_flavor(name);
  if (!flavor) return out;
  auto relation = *flavor == SodFlavor::Ssd ? rel::kSsdRole : rel::kDsdRole;
  for (const auto& row : snapshot_->with_prefix(relation, {std::string(name)})) out.insert(row[1]);
  return out;
}

std::size_t PolicyView::sod_set_cardinality(std::string_view name) const {
  auto flavor = sod_flavor(name);
  if (!flavor) return 0;
  auto range = snapshot_->with_prefix(*flavor == SodFlavor::Ssd ? rel::kSsd : rel::kDsd, {std::string(name)});
  return to_natural((*range.begin())[1]);
}

}  // namespace rbac
