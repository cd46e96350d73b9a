#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rbac/fact_store.hpp"

namespace rbac {

using RoleSet = std::set<std::string, std::less<>>;

// Reflexive-transitive closure of the role hierarchy (`geq`), frozen with the
// committed version that produced it.
class ClosureIndex : public Attachment {
 public:
  static constexpr std::string_view kName = "closure";

  /// From-scratch closure over the snapshot's `role` and `rh` relations.
  /// Throws CYCLE_DETECTED if the edges are cyclic.
  static std::shared_ptr<const ClosureIndex> build(const Snapshot& snapshot);

  /// Incremental update: role inserts and edge inserts extend `previous`;
  /// any role or edge removal falls back to a rebuild.
  static std::shared_ptr<const ClosureIndex> update(const ClosureIndex& previous, const Delta& delta,
                                                    const Snapshot& next);

  bool geq(std::string_view senior, std::string_view junior) const;
  /// Roles r with senior >= r, including senior itself. Empty for unknown roles.
  const RoleSet& juniors(std::string_view senior) const;
  const RoleSet& seniors(std::string_view junior) const;
  std::vector<std::pair<std::string, std::string>> pairs() const;
  std::size_t size() const;

  /// `geq(senior,junior)` lines in snapshot format.
  std::string dump() const;

 private:
  using Rows = std::map<std::string, std::shared_ptr<const RoleSet>, std::less<>>;
  static void add_pair(Rows& rows, const std::string& from, const std::string& to);

  Rows juniors_;
  Rows seniors_;
};

/// Commit-time maintainer keeping a ClosureIndex attached to every version.
Maintainer closure_maintainer();

/// Shortest rh path from `from` down to `to` in the snapshot, as rh tuples.
std::vector<Tuple> hierarchy_path(const Snapshot& snapshot, std::string_view from, std::string_view to);

}  // namespace rbac
