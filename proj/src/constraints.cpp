#include "rbac/constraints.hpp"

#include <algorithm>
#include <map>

#include "rbac/closure.hpp"
#include "rbac/engine.hpp"

namespace rbac::constraints {
namespace {

std::shared_ptr<const ClosureIndex> closure_of(const Snapshot& post) {
  auto closure = post.attachment<ClosureIndex>(ClosureIndex::kName);
  return closure ? closure : ClosureIndex::build(post);
}

struct SodSet {
  std::string name;
  std::size_t cardinality = 0;
  RoleSet roles;
};

std::vector<SodSet> sod_sets(const Snapshot& post, std::string_view def, std::string_view members) {
  std::vector<SodSet> out;
  for (const auto& row : post.rows(def)) {
    SodSet set{row[0], to_natural(row[1]), {}};
    for (const auto& m : post.with_prefix(members, {row[0]})) set.roles.insert(m[1]);
    out.push_back(std::move(set));
  }
  return out;
}

std::string string_of(std::string_view v) { return std::string(v); }

}  // namespace

std::optional<Violation> check_ssd(const Snapshot& post) {
  auto sets = sod_sets(post, rel::kSsd, rel::kSsdRole);
  if (sets.empty()) return std::nullopt;
  const bool hierarchical = components_of(post).hierarchy;
  auto closure = hierarchical ? closure_of(post) : nullptr;

  // user -> held role -> the assigned role it is held through
  std::map<std::string, std::map<std::string, std::string>> held;
  for (const auto& ua : post.rows(rel::kUa)) {
    auto& mine = held[ua[0]];
    if (!hierarchical) {
      mine.emplace(ua[1], ua[1]);
      continue;
    }
    for (const auto& junior : closure->juniors(ua[1])) {
      auto [it, fresh] = mine.emplace(junior, ua[1]);
      // Prefer the direct assignment as the witness.
      if (!fresh && junior == ua[1]) it->second = ua[1];
    }
  }

  for (const auto& set : sets) {
    for (const auto& [user, roles] : held) {
      std::vector<std::string> hit;
      for (const auto& r : set.roles) {
        if (roles.count(r)) hit.push_back(r);
      }
      if (hit.size() < set.cardinality) continue;
      Violation v{"ssd:" + set.name, {}, user, hit, set.cardinality};
      v.witness.push_back({string_of(rel::kSsd), {set.name, std::to_string(set.cardinality)}});
      for (const auto& r : hit) {
        const std::string& via = roles.at(r);
        Tuple assignment{string_of(rel::kUa), {user, via}};
        if (std::find(v.witness.begin(), v.witness.end(), assignment) == v.witness.end()) {
          v.witness.push_back(std::move(assignment));
        }
        if (via != r) v.witness.push_back({"geq", {via, r}});
      }
      return v;
    }
  }
  return std::nullopt;
}

std::optional<Violation> check_dsd(const Snapshot& post) {
  auto sets = sod_sets(post, rel::kDsd, rel::kDsdRole);
  if (sets.empty()) return std::nullopt;
  std::map<std::string, RoleSet> active;
  for (const auto& row : post.rows(rel::kSessionRole)) active[row[0]].insert(row[1]);
  for (const auto& set : sets) {
    for (const auto& [session, roles] : active) {
      std::vector<std::string> hit;
      for (const auto& r : set.roles) {
        if (roles.count(r)) hit.push_back(r);
      }
      if (hit.size() < set.cardinality) continue;
      Violation v{"dsd:" + set.name, {}, session, hit, set.cardinality};
      v.witness.push_back({string_of(rel::kDsd), {set.name, std::to_string(set.cardinality)}});
      for (const auto& r : hit) v.witness.push_back({string_of(rel::kSessionRole), {session, r}});
      return v;
    }
  }
  return std::nullopt;
}

std::optional<Violation> check_sod_cardinality(const Snapshot& post) {
  for (auto [def, members] : {std::pair{rel::kSsd, rel::kSsdRole}, std::pair{rel::kDsd, rel::kDsdRole}}) {
    for (const auto& set : sod_sets(post, def, members)) {
      if (set.roles.size() >= 2 && set.cardinality >= 2 && set.cardinality <= set.roles.size()) continue;
      Violation v{"sod-cardinality:" + set.name, {}, set.name, {set.roles.begin(), set.roles.end()},
                  set.cardinality};
      v.witness.push_back({string_of(def), {set.name, std::to_string(set.cardinality)}});
      for (const auto& r : set.roles) v.witness.push_back({string_of(members), {set.name, r}});
      return v;
    }
  }
  return std::nullopt;
}

std::optional<Violation> check_session_soundness(const Snapshot& post) {
  const bool hierarchical = components_of(post).hierarchy;
  auto closure = hierarchical ? closure_of(post) : nullptr;
  for (const auto& row : post.rows(rel::kSessionRole)) {
    auto owner = post.with_prefix(rel::kSession, {row[0]});
    if (owner.empty()) continue;  // referential check reports this
    const std::string& user = (*owner.begin())[1];
    bool eligible = false;
    for (const auto& ua : post.with_prefix(rel::kUa, {user})) {
      if (hierarchical ? closure->geq(ua[1], row[1]) : ua[1] == row[1]) {
        eligible = true;
        break;
      }
    }
    if (eligible) continue;
    Violation v{"session-soundness", {}, row[0], {row[1]}, 0};
    v.witness.push_back({string_of(rel::kSessionRole), row});
    v.witness.push_back({string_of(rel::kSession), *owner.begin()});
    return v;
  }
  return std::nullopt;
}

std::optional<Violation> check_components(const Snapshot& post) {
  for (const auto& row : post.rows(rel::kDisabled)) {
    const std::string& component = row[0];
    std::string_view owned;
    if (component == "hierarchy") {
      owned = rel::kRh;
    } else if (component == "ssd") {
      owned = rel::kSsd;
    } else if (component == "dsd") {
      owned = rel::kDsd;
    } else {
      return Violation{"components", {{string_of(rel::kDisabled), row}}, component, {}, 0};
    }
    const auto& rows = post.rows(owned);
    if (rows.empty()) continue;
    return Violation{"components", {{string_of(rel::kDisabled), row}, {string_of(owned), *rows.begin()}},
                     component, {}, 0};
  }
  return std::nullopt;
}

void register_checks(FactStore& store) {
  auto names = [](std::initializer_list<std::string_view> list) {
    std::vector<std::string> out;
    for (auto n : list) out.emplace_back(n);
    return out;
  };
  auto adapt = [](std::optional<Violation> (*fn)(const Snapshot&)) {
    return [fn](const Snapshot& post, const Delta&) { return fn(post); };
  };
  store.add_check({"components", names({rel::kDisabled, rel::kRh, rel::kSsd, rel::kDsd}), adapt(&check_components),
                   ErrorCode::ConstraintViolation});
  store.add_check({"sod-cardinality", names({rel::kSsd, rel::kSsdRole, rel::kDsd, rel::kDsdRole}),
                   adapt(&check_sod_cardinality), ErrorCode::BadCardinality});
  store.add_check({"session-soundness", names({rel::kSessionRole, rel::kUa, rel::kRh, rel::kDisabled}),
                   adapt(&check_session_soundness), ErrorCode::ConstraintViolation});
  store.add_check({"ssd", names({rel::kUa, rel::kRh, rel::kSsd, rel::kSsdRole, rel::kDisabled}), adapt(&check_ssd),
                   ErrorCode::ConstraintViolation});
  store.add_check({"dsd", names({rel::kSessionRole, rel::kDsd, rel::kDsdRole, rel::kDisabled}), adapt(&check_dsd),
                   ErrorCode::ConstraintViolation});
}

}  // namespace rbac::constraints
