#include "rbac/schema.hpp"

namespace rbac {

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::User: return "user";
    case EntityKind::Role: return "role";
    case EntityKind::Operation: return "operation";
    case EntityKind::Object: return "object";
    case EntityKind::Session: return "session";
    case EntityKind::SodSet: return "sod-set";
  }
  return "entity";
}

std::optional<EntityKind> referenced_kind(FieldKind field) {
  switch (field) {
    case FieldKind::User: return EntityKind::User;
    case FieldKind::Role: return EntityKind::Role;
    case FieldKind::Operation: return EntityKind::Operation;
    case FieldKind::Object: return EntityKind::Object;
    case FieldKind::Session: return EntityKind::Session;
    case FieldKind::SodSet: return EntityKind::SodSet;
    case FieldKind::Natural:
    case FieldKind::Symbol:
      return std::nullopt;
  }
  return std::nullopt;
}

Schema::Schema(std::vector<RelationSchema> relations) : relations_(std::move(relations)) {}

const RelationSchema* Schema::find(std::string_view relation) const {
  for (const auto& r : relations_) {
    if (r.name == relation) return &r;
  }
  return nullptr;
}

std::vector<const RelationSchema*> Schema::definers(EntityKind kind) const {
  std::vector<const RelationSchema*> out;
  for (const auto& r : relations_) {
    if (r.defines == kind) out.push_back(&r);
  }
  return out;
}

std::shared_ptr<const Schema> Schema::rbac() {
  using F = FieldKind;
  using E = EntityKind;
  static const auto schema = std::make_shared<const Schema>(std::vector<RelationSchema>{
      {std::string(rel::kUser), {F::User}, E::User, 0},
      {std::string(rel::kRole), {F::Role}, E::Role, 0},
      {std::string(rel::kOp), {F::Operation}, E::Operation, 0},
      {std::string(rel::kObj), {F::Object}, E::Object, 0},
      {std::string(rel::kSsd), {F::SodSet, F::Natural}, E::SodSet, 0},
      {std::string(rel::kDsd), {F::SodSet, F::Natural}, E::SodSet, 0},
      {std::string(rel::kDisabled), {F::Symbol}, std::nullopt, 0},
      {std::string(rel::kSession), {F::Session, F::User}, E::Session, 1},
      {std::string(rel::kUa), {F::User, F::Role}, std::nullopt, 2},
      {std::string(rel::kPa), {F::Operation, F::Object, F::Role}, std::nullopt, 2},
      {std::string(rel::kRh), {F::Role, F::Role}, std::nullopt, 2},
      {std::string(rel::kSsdRole), {F::SodSet, F::Role}, std::nullopt, 2},
      {std::string(rel::kDsdRole), {F::SodSet, F::Role}, std::nullopt, 2},
      {std::string(rel::kSessionRole), {F::Session, F::Role}, std::nullopt, 2},
  });
  return schema;
}

}  // namespace rbac
