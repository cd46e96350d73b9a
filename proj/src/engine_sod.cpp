#include "engine_internal.hpp"

namespace rbac {

using namespace detail;

namespace {

std::string_view def_relation(SodFlavor flavor) { return flavor == SodFlavor::Ssd ? rel::kSsd : rel::kDsd; }
std::string_view member_relation(SodFlavor flavor) {
  return flavor == SodFlavor::Ssd ? rel::kSsdRole : rel::kDsdRole;
}

void require_cardinality(std::size_t members, std::size_t cardinality) {
  if (members < 2 || cardinality < 2 || cardinality > members) {
    throw RbacError(ErrorCode::BadCardinality, "cardinality " + std::to_string(cardinality) + " over " +
                                                   std::to_string(members) + " roles (need 2 <= n <= |roles|)");
  }
}

std::optional<SodFlavor> flavor_in(const Transaction& txn, std::string_view name) {
  if (!txn.with_prefix(rel::kSsd, {std::string(name)}).empty()) return SodFlavor::Ssd;
  if (!txn.with_prefix(rel::kDsd, {std::string(name)}).empty()) return SodFlavor::Dsd;
  return std::nullopt;
}

}  // namespace

void Engine::require_flavor(SodFlavor flavor) const {
  Components c = components();
  if (flavor == SodFlavor::Ssd && !c.ssd) {
    throw RbacError(ErrorCode::UnknownRelation, "ssd (ssd component is disabled)");
  }
  if (flavor == SodFlavor::Dsd && !c.dsd) {
    throw RbacError(ErrorCode::UnknownRelation, "dsd (dsd component is disabled)");
  }
}

SodFlavor Engine::require_sod_set(std::string_view name) const {
  auto flavor = view().sod_flavor(name);
  if (!flavor) throw RbacError(ErrorCode::UnknownEntity, "sod-set " + std::string(name) + " does not exist");
  require_flavor(*flavor);
  return *flavor;
}

StateVersion Engine::create_sod_set(SodFlavor flavor, std::string_view name, const NameSet& roles,
                                    std::size_t cardinality) {
  require_flavor(flavor);
  return mutate([&](Transaction& txn) {
    require_name(name);
    if (txn.entity_exists(EntityKind::SodSet, name)) {
      throw RbacError(ErrorCode::DuplicateEntity, "sod-set " + std::string(name) + " already exists");
    }
    for (const auto& role : roles) require_entity(txn, EntityKind::Role, role);
    require_cardinality(roles.size(), cardinality);
    txn.insert(def_relation(flavor), {std::string(name), std::to_string(cardinality)});
    for (const auto& role : roles) txn.insert(member_relation(flavor), {std::string(name), role});
  });
}

StateVersion Engine::create_ssd_set(std::string_view name, const NameSet& roles, std::size_t cardinality) {
  return create_sod_set(SodFlavor::Ssd, name, roles, cardinality);
}

StateVersion Engine::create_dsd_set(std::string_view name, const NameSet& roles, std::size_t cardinality) {
  return create_sod_set(SodFlavor::Dsd, name, roles, cardinality);
}

StateVersion Engine::add_sod_role_member(std::string_view name, std::string_view role) {
  const SodFlavor flavor = require_sod_set(name);
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::Role, role);
    Row row{std::string(name), std::string(role)};
    if (txn.contains(member_relation(flavor), row)) {
      throw RbacError(ErrorCode::DuplicateAssignment, format_tuple(member_relation(flavor), row) + " already exists");
    }
    txn.insert(member_relation(flavor), std::move(row));
  });
}

StateVersion Engine::delete_sod_role_member(std::string_view name, std::string_view role) {
  const SodFlavor flavor = require_sod_set(name);
  return mutate([&](Transaction& txn) {
    require_entity(txn, EntityKind::Role, role);
    Row row{std::string(name), std::string(role)};
    if (!txn.contains(member_relation(flavor), row)) {
      throw RbacError(ErrorCode::MissingAssignment, format_tuple(member_relation(flavor), row) + " does not exist");
    }
    const auto members = txn.with_prefix(member_relation(flavor), {std::string(name)}).size();
    const auto def = txn.with_prefix(def_relation(flavor), {std::string(name)}).front();
    require_cardinality(members - 1, to_natural(def[1]));
    txn.remove(member_relation(flavor), row);
  });
}

StateVersion Engine::set_sod_cardinality(std::string_view name, std::size_t cardinality) {
  const SodFlavor flavor = require_sod_set(name);
  return mutate([&](Transaction& txn) {
    if (flavor_in(txn, name) != flavor) {
      throw RbacError(ErrorCode::UnknownEntity, "sod-set " + std::string(name) + " does not exist");
    }
    const auto members = txn.with_prefix(member_relation(flavor), {std::string(name)}).size();
    require_cardinality(members, cardinality);
    const auto def = txn.with_prefix(def_relation(flavor), {std::string(name)}).front();
    txn.remove(def_relation(flavor), def);
    txn.insert(def_relation(flavor), {std::string(name), std::to_string(cardinality)});
  });
}

NameSet Engine::sod_sets(SodFlavor flavor) const {
  require_flavor(flavor);
  return view().sod_sets(flavor);
}

NameSet Engine::sod_set_roles(std::string_view name) const {
  require_sod_set(name);
  return view().sod_set_roles(name);
}

std::size_t Engine::sod_set_cardinality(std::string_view name) const {
  require_sod_set(name);
  return view().sod_set_cardinality(name);
}

}  // namespace rbac
