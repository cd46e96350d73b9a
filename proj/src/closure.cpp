#include "rbac/closure.hpp"

#include <algorithm>
#include <deque>

namespace rbac {
namespace {

const RoleSet& empty_set() {
  static const RoleSet empty;
  return empty;
}

[[noreturn]] void throw_cycle(const Snapshot& next, const std::string& asc, const std::string& desc) {
  Violation violation{"acyclic", {}, {}, {}, 0};
  violation.witness.push_back({std::string(rel::kRh), {asc, desc}});
  for (auto& t : hierarchy_path(next, desc, asc)) violation.witness.push_back(std::move(t));
  violation.subject = asc;
  throw RbacError(ErrorCode::CycleDetected, "rh(" + asc + "," + desc + ") closes a cycle", std::move(violation));
}

}  // namespace

void ClosureIndex::add_pair(Rows& rows, const std::string& from, const std::string& to) {
  auto& slot = rows[from];
  if (slot && slot->count(to)) return;
  auto copy = slot ? std::make_shared<RoleSet>(*slot) : std::make_shared<RoleSet>();
  copy->insert(to);
  slot = std::move(copy);
}

std::shared_ptr<const ClosureIndex> ClosureIndex::build(const Snapshot& snapshot) {
  auto index = std::make_shared<ClosureIndex>();
  const auto& rh = snapshot.rows(rel::kRh);
  for (const auto& role_row : snapshot.rows(rel::kRole)) {
    const std::string& root = role_row[0];
    auto reach = std::make_shared<RoleSet>();
    std::deque<std::string> queue{root};
    reach->insert(root);
    while (!queue.empty()) {
      std::string cur = std::move(queue.front());
      queue.pop_front();
      for (const auto& edge : snapshot.with_prefix(rel::kRh, {cur})) {
        if (reach->insert(edge[1]).second) queue.push_back(edge[1]);
      }
    }
    index->juniors_[root] = reach;
  }
  for (const auto& edge : rh) {
    if (index->juniors(edge[1]).count(edge[0])) throw_cycle(snapshot, edge[0], edge[1]);
  }
  std::map<std::string, RoleSet, std::less<>> seniors;
  for (const auto& [senior, juniors] : index->juniors_) {
    for (const auto& junior : *juniors) seniors[junior].insert(senior);
  }
  for (auto& [junior, set] : seniors) index->seniors_[junior] = std::make_shared<RoleSet>(std::move(set));
  return index;
}

std::shared_ptr<const ClosureIndex> ClosureIndex::update(const ClosureIndex& previous, const Delta& delta,
                                                         const Snapshot& next) {
  auto removed = [&](std::string_view relation) {
    auto it = delta.find(relation);
    return it != delta.end() && !it->second.deletes.empty();
  };
  if (removed(rel::kRh) || removed(rel::kRole)) return build(next);

  auto index = std::make_shared<ClosureIndex>(previous);
  if (auto it = delta.find(rel::kRole); it != delta.end()) {
    for (const auto& row : it->second.inserts) {
      add_pair(index->juniors_, row[0], row[0]);
      add_pair(index->seniors_, row[0], row[0]);
    }
  }
  if (auto it = delta.find(rel::kRh); it != delta.end()) {
    for (const auto& edge : it->second.inserts) {
      const std::string& asc = edge[0];
      const std::string& desc = edge[1];
      if (index->geq(desc, asc)) throw_cycle(next, asc, desc);
      // Every senior of asc gains every junior of desc.
      const RoleSet uppers = index->seniors(asc);
      const RoleSet lowers = index->juniors(desc);
      for (const auto& x : uppers) {
        for (const auto& y : lowers) {
          add_pair(index->juniors_, x, y);
          add_pair(index->seniors_, y, x);
        }
      }
    }
  }
  return index;
}

bool ClosureIndex::geq(std::string_view senior, std::string_view junior) const {
  return juniors(senior).count(junior) > 0;
}

const RoleSet& ClosureIndex::juniors(std::string_view senior) const {
  auto it = juniors_.find(senior);
  return it == juniors_.end() ? empty_set() : *it->second;
}

const RoleSet& ClosureIndex::seniors(std::string_view junior) const {
  auto it = seniors_.find(junior);
  return it == seniors_.end() ? empty_set() : *it->second;
}

std::vector<std::pair<std::string, std::string>> ClosureIndex::pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [senior, juniors] : juniors_) {
    for (const auto& junior : *juniors) out.emplace_back(senior, junior);
  }
  return out;
}

std::size_t ClosureIndex::size() const {
  std::size_t n = 0;
  for (const auto& entry : juniors_) n += entry.second->size();
  return n;
}

std::string ClosureIndex::dump() const {
  std::vector<std::string> lines;
  for (const auto& [senior, junior] : pairs()) lines.push_back(format_tuple("geq", {senior, junior}));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& line : lines) out += line + '\n';
  return out;
}

Maintainer closure_maintainer() {
  return Maintainer{
      std::string(ClosureIndex::kName),
      {std::string(rel::kRole), std::string(rel::kRh)},
      [](const Snapshot* previous, const Delta& delta, const Snapshot& next) -> std::shared_ptr<const Attachment> {
        if (previous != nullptr) {
          if (auto index = previous->attachment<ClosureIndex>(ClosureIndex::kName)) {
            return ClosureIndex::update(*index, delta, next);
          }
        }
        return ClosureIndex::build(next);
      }};
}

std::vector<Tuple> hierarchy_path(const Snapshot& snapshot, std::string_view from, std::string_view to) {
  std::map<std::string, std::string, std::less<>> parent;
  std::deque<std::string> queue{std::string(from)};
  parent[std::string(from)] = "";
  while (!queue.empty()) {
    std::string cur = std::move(queue.front());
    queue.pop_front();
    if (cur == to) break;
    for (const auto& edge : snapshot.with_prefix(rel::kRh, {cur})) {
      if (parent.emplace(edge[1], cur).second) queue.push_back(edge[1]);
    }
  }
  std::vector<Tuple> path;
  if (!parent.count(to) || from == to) return path;
  for (std::string cur(to); cur != from; cur = parent[cur]) {
    path.push_back({std::string(rel::kRh), {parent[cur], cur}});
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace rbac
