#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rbac {

enum class EntityKind { User, Role, Operation, Object, Session, SodSet };

enum class FieldKind { User, Role, Operation, Object, Session, SodSet, Natural, Symbol };

std::string_view to_string(EntityKind kind);

/// Entity kind a field refers to, or nullopt for Natural/Symbol fields.
std::optional<EntityKind> referenced_kind(FieldKind field);

struct RelationSchema {
  std::string name;
  std::vector<FieldKind> fields;
  // When set, field 0 introduces an entity of this kind; any further entity
  // fields are ordinary references.
  std::optional<EntityKind> defines;
  // Snapshot loading inserts lower ranks first so references resolve.
  int load_rank = 0;
};

class Schema {
 public:
  explicit Schema(std::vector<RelationSchema> relations);

  const RelationSchema* find(std::string_view relation) const;
  const std::vector<RelationSchema>& relations() const { return relations_; }
  std::vector<const RelationSchema*> definers(EntityKind kind) const;

  /// The base relations of the RBAC engine.
  static std::shared_ptr<const Schema> rbac();

 private:
  std::vector<RelationSchema> relations_;
};

// Relation names of the RBAC schema.
namespace rel {
inline constexpr std::string_view kUser = "user";
inline constexpr std::string_view kRole = "role";
inline constexpr std::string_view kOp = "op";
inline constexpr std::string_view kObj = "obj";
inline constexpr std::string_view kSession = "session";
inline constexpr std::string_view kSsd = "ssd";
inline constexpr std::string_view kDsd = "dsd";
inline constexpr std::string_view kDisabled = "disabled";
inline constexpr std::string_view kUa = "ua";
inline constexpr std::string_view kPa = "pa";
inline constexpr std::string_view kSessionRole = "session_role";
inline constexpr std::string_view kRh = "rh";
inline constexpr std::string_view kSsdRole = "ssd_role";
inline constexpr std::string_view kDsdRole = "dsd_role";
}  // namespace rel

}  // namespace rbac
