#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <tuple>

#include "rbac/admin_search.hpp"

namespace rbac::admin {

namespace {

using Mask = std::uint64_t;

constexpr std::size_t kMaxUserPermissions = 20;

// The target with users and permissions numbered in sorted order.
struct Instance {
  std::vector<std::string> users;
  std::vector<Permission> perms;
  std::vector<Mask> rows;  // rows[u] = permissions of user u
  std::vector<Mask> candidates;
};

std::vector<std::size_t> bits(Mask m) {
  std::vector<std::size_t> out;
  while (m) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    m &= m - 1;
  }
  return out;
}

// Compares permission sets by their sorted member lists.
bool content_less(Mask a, Mask b) { return bits(a) < bits(b); }

Instance make_instance(const AccessMatrix& target) {
  if (target.empty()) throw RbacError(ErrorCode::ParseError, "target is empty");
  Instance in;
  std::set<Permission> perms;
  for (const auto& [u, p] : target) {
    if (in.users.empty() || in.users.back() != u) in.users.push_back(u);
    perms.insert(p);
  }
  if (perms.size() > 64) {
    throw RbacError(ErrorCode::CapExceeded, std::to_string(perms.size()) + " permissions; at most 64 supported");
  }
  in.perms.assign(perms.begin(), perms.end());
  in.rows.assign(in.users.size(), 0);
  for (const auto& [u, p] : target) {
    auto ui = std::lower_bound(in.users.begin(), in.users.end(), u) - in.users.begin();
    auto pi = std::lower_bound(in.perms.begin(), in.perms.end(), p) - in.perms.begin();
    in.rows[ui] |= Mask{1} << pi;
  }
  std::set<Mask> subsets;
  for (std::size_t u = 0; u < in.users.size(); ++u) {
    const Mask row = in.rows[u];
    if (static_cast<std::size_t>(std::popcount(row)) > kMaxUserPermissions) {
      throw RbacError(ErrorCode::CapExceeded, "user " + in.users[u] + " has " +
                                                  std::to_string(std::popcount(row)) + " permissions; at most " +
                                                  std::to_string(kMaxUserPermissions) + " supported");
    }
    for (Mask s = row; s; s = (s - 1) & row) subsets.insert(s);
  }
  in.candidates.assign(subsets.begin(), subsets.end());
  std::sort(in.candidates.begin(), in.candidates.end(), content_less);
  return in;
}

// Fewest members (indices into `family`) whose union is `row`, using only
// members inside `row`; nullopt if no such cover exists.
std::optional<std::vector<std::size_t>> min_cover(const std::vector<Mask>& family, Mask row) {
  std::vector<std::size_t> inside;
  Mask reach = 0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if ((family[i] & ~row) == 0) {
      inside.push_back(i);
      reach |= family[i];
    }
  }
  if (reach != row) return std::nullopt;
  const std::size_t n = inside.size();
  std::optional<std::uint32_t> best;
  for (std::uint32_t pick = 1; pick < (std::uint32_t{1} << n); ++pick) {
    if (best && std::popcount(pick) >= std::popcount(*best)) continue;
    Mask u = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick >> i & 1) u |= family[inside[i]];
    }
    if (u == row) best = pick;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (*best >> i & 1) out.push_back(inside[i]);
  }
  return out;
}

// Cheapest way to give one family member its set: edges to strictly smaller
// members plus direct grants for the rest.
struct RolePlan {
  std::vector<std::size_t> juniors;
  Mask direct = 0;
  std::size_t cost() const { return juniors.size() + static_cast<std::size_t>(std::popcount(direct)); }
};

RolePlan plan_role(const std::vector<Mask>& family, std::size_t self) {
  const Mask s = family[self];
  std::vector<std::size_t> smaller;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (i != self && (family[i] & ~s) == 0) smaller.push_back(i);
  }
  RolePlan best{{}, s};
  const std::size_t n = smaller.size();
  for (std::uint32_t pick = 1; pick < (std::uint32_t{1} << n); ++pick) {
    Mask u = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick >> i & 1) {
        u |= family[smaller[i]];
        ++count;
      }
    }
    const std::size_t cost = count + static_cast<std::size_t>(std::popcount(s & ~u));
    if (cost < best.cost()) {
      best.juniors.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (pick >> i & 1) best.juniors.push_back(smaller[i]);
      }
      best.direct = s & ~u;
    }
  }
  return best;
}

struct Evaluation {
  std::size_t ua = 0;
  std::size_t pa = 0;
  std::size_t rh = 0;
  std::size_t total() const { return ua + pa + rh; }
};

std::optional<Evaluation> evaluate_family(const Instance& in, const std::vector<Mask>& family, bool hierarchy) {
  Evaluation e;
  for (Mask row : in.rows) {
    auto cover = min_cover(family, row);
    if (!cover) return std::nullopt;
    e.ua += cover->size();
  }
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (hierarchy) {
      RolePlan p = plan_role(family, i);
      e.pa += static_cast<std::size_t>(std::popcount(p.direct));
      e.rh += p.juniors.size();
    } else {
      e.pa += static_cast<std::size_t>(std::popcount(family[i]));
    }
  }
  return e;
}

RoleDecomposition build(const Instance& in, const std::vector<Mask>& family, bool hierarchy, const NameSet& reserved) {
  RoleDecomposition d;
  NameSet taken = reserved;
  for (std::size_t i = 0; i < family.size(); ++i) {
    d.roles.push_back(fresh_role_name(taken));
    taken.insert(d.roles.back());
  }
  for (std::size_t u = 0; u < in.users.size(); ++u) {
    const auto cover = min_cover(family, in.rows[u]);
    for (auto i : *cover) d.ua.emplace(in.users[u], d.roles[i]);
  }
  for (std::size_t i = 0; i < family.size(); ++i) {
    RolePlan p = hierarchy ? plan_role(family, i) : RolePlan{{}, family[i]};
    for (auto b : bits(p.direct)) d.pa.emplace(in.perms[b], d.roles[i]);
    for (auto j : p.juniors) d.rh.emplace(d.roles[i], d.roles[j]);
  }
  return d;
}

// Visits k-subsets of the candidates in lexicographic order.
template <class Visit>
void for_each_combination(const std::vector<Mask>& items, std::size_t k, std::size_t start, std::vector<Mask>& chosen,
                          Visit& visit) {
  if (chosen.size() == k) {
    visit(chosen);
    return;
  }
  for (std::size_t i = start; i + (k - chosen.size()) <= items.size(); ++i) {
    chosen.push_back(items[i]);
    for_each_combination(items, k, i + 1, chosen, visit);
    chosen.pop_back();
  }
}

}  // namespace

std::string fresh_role_name(const NameSet& taken) {
  for (std::size_t k = 1;; ++k) {
    std::string name = "role_" + std::to_string(k);
    if (!taken.contains(name)) return name;
  }
}

AccessMatrix induced_relation(const RoleDecomposition& d) {
  std::map<std::string, std::set<std::string>> juniors;
  for (const auto& r : d.roles) juniors[r].insert(r);
  // rh is acyclic, so |roles| rounds of propagation reach the closure.
  for (std::size_t round = 0; round < d.roles.size(); ++round) {
    for (const auto& [senior, junior] : d.rh) {
      auto below = juniors[junior];
      juniors[senior].insert(below.begin(), below.end());
    }
  }
  std::map<std::string, std::set<Permission>> perms;
  for (const auto& [p, r] : d.pa) perms[r].insert(p);
  AccessMatrix out;
  for (const auto& [u, r] : d.ua) {
    for (const auto& j : juniors[r]) {
      for (const auto& p : perms[j]) out.emplace(u, p);
    }
  }
  return out;
}

RoleDecomposition minimize_roles(const AccessMatrix& target, const NameSet& reserved) {
  const Instance in = make_instance(target);
  const std::set<Mask> distinct(in.rows.begin(), in.rows.end());
  for (std::size_t k = 1; k <= distinct.size(); ++k) {
    std::optional<std::vector<Mask>> best;
    std::size_t best_cost = 0;
    std::vector<Mask> chosen;
    auto visit = [&](const std::vector<Mask>& family) {
      auto e = evaluate_family(in, family, false);
      if (e && (!best || e->total() < best_cost)) {
        best = family;
        best_cost = e->total();
      }
    };
    for_each_combination(in.candidates, k, 0, chosen, visit);
    if (best) return build(in, *best, false, reserved);
  }
  // One role per distinct row always works, so the loop returns.
  throw RbacError(ErrorCode::CapExceeded, "no decomposition found");
}

RoleDecomposition minimize_assignments(const AccessMatrix& target, const MinimizeOptions& options) {
  const Instance in = make_instance(target);
  const bool by_roles = options.objective == Objective::Roles;
  const std::size_t floor = in.users.size() + in.perms.size();

  std::optional<std::vector<Mask>> best;
  std::tuple<std::size_t, std::size_t> best_key;
  bool done = false;
  std::vector<Mask> family;

  // Include-first DFS visits families in lexicographic order of content, so
  // the first family reaching a key is the tie-break winner.
  auto search = [&](auto&& self, std::size_t next) -> void {
    if (done) return;
    if (!family.empty()) {
      if (auto e = evaluate_family(in, family, true)) {
        auto key = by_roles ? std::tuple{family.size(), e->total()} : std::tuple{e->total(), family.size()};
        if (!best || key < best_key) {
          best = family;
          best_key = key;
          if (!by_roles && e->total() == floor) done = true;
        }
      }
    }
    if (family.size() == options.role_cap) return;
    if (best) {
      // Any extension has at least |family|+1 roles, each needing a grant or
      // an edge, and every user needs an assignment.
      const std::size_t bound = in.users.size() + std::max(in.perms.size(), family.size() + 1);
      if (!by_roles && bound >= std::get<0>(best_key)) return;
      if (by_roles && family.size() + 1 > std::get<0>(best_key)) return;
    }
    for (std::size_t i = next; i < in.candidates.size() && !done; ++i) {
      family.push_back(in.candidates[i]);
      self(self, i + 1);
      family.pop_back();
    }
  };
  search(search, 0);

  if (!best) {
    throw RbacError(ErrorCode::CapExceeded, "no exact decomposition with at most " +
                                                std::to_string(options.role_cap) + " roles");
  }
  return build(in, *best, true, options.reserved);
}

}  // namespace rbac::admin
