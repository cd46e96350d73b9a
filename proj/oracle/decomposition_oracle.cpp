#include <bit>
#include <cstdint>

#include "rbac_oracle/oracle.hpp"

namespace rbac::oracle {

namespace {

struct Target {
  std::vector<std::uint32_t> rows;  // permission mask per user
  std::size_t perms = 0;
};

Target encode(const admin::AccessMatrix& target) {
  std::map<std::string, std::uint32_t> rows;
  std::map<Permission, std::size_t> perm_index;
  for (const auto& [u, p] : target) perm_index.emplace(p, 0);
  std::size_t i = 0;
  for (auto& [p, idx] : perm_index) idx = i++;
  for (const auto& [u, p] : target) rows[u] |= 1u << perm_index[p];
  Target t;
  t.perms = perm_index.size();
  for (const auto& [u, m] : rows) t.rows.push_back(m);
  return t;
}

// Fewest roles whose authorized sets stay inside `row` and together give
// exactly `row`; nullopt if impossible.
std::optional<std::size_t> min_user_assignments(const std::vector<std::uint32_t>& authorized, std::uint32_t row) {
  const std::size_t k = authorized.size();
  std::optional<std::size_t> best;
  for (std::uint32_t pick = 1; pick < (1u << k); ++pick) {
    std::uint32_t got = 0;
    bool inside = true;
    for (std::size_t r = 0; r < k; ++r) {
      if (!(pick >> r & 1)) continue;
      if (authorized[r] & ~row) inside = false;
      got |= authorized[r];
    }
    if (!inside || got != row) continue;
    const auto n = static_cast<std::size_t>(std::popcount(pick));
    if (!best || n < *best) best = n;
  }
  return best;
}

std::optional<std::size_t> total_assignments(const Target& t, const std::vector<std::uint32_t>& authorized) {
  std::size_t total = 0;
  for (auto row : t.rows) {
    auto n = min_user_assignments(authorized, row);
    if (!n) return std::nullopt;
    total += *n;
  }
  return total;
}

// Least |ua|+|pa|+|rh| over k roles numbered so that every edge goes from a
// lower to a higher number (every DAG has such a numbering).
std::optional<std::size_t> best_with_roles(const Target& t, std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) slots.emplace_back(i, j);
  }
  const std::uint32_t all_perms = (1u << t.perms) - 1;
  std::optional<std::size_t> best;

  for (std::uint32_t dag = 0; dag < (1u << slots.size()); ++dag) {
    const auto edges = static_cast<std::size_t>(std::popcount(dag));
    if (best && edges + t.rows.size() >= *best) continue;
    // below[i]: roles i reaches, itself included. Juniors have higher numbers.
    std::vector<std::uint32_t> below(k);
    for (std::size_t i = k; i-- > 0;) {
      below[i] = 1u << i;
      for (std::size_t e = 0; e < slots.size(); ++e) {
        if ((dag >> e & 1) && slots[e].first == i) below[i] |= below[slots[e].second];
      }
    }
    std::vector<std::uint32_t> pa(k, 0);
    auto assign = [&](auto&& self, std::size_t role, std::size_t cost) -> void {
      if (best && cost + t.rows.size() >= *best) return;
      if (role == k) {
        std::vector<std::uint32_t> authorized(k, 0);
        for (std::size_t i = 0; i < k; ++i) {
          for (std::size_t j = 0; j < k; ++j) {
            if (below[i] >> j & 1) authorized[i] |= pa[j];
          }
        }
        if (auto ua = total_assignments(t, authorized)) {
          if (!best || cost + *ua < *best) best = cost + *ua;
        }
        return;
      }
      for (std::uint32_t m = 0; m <= all_perms; ++m) {
        pa[role] = m;
        self(self, role + 1, cost + static_cast<std::size_t>(std::popcount(m)));
      }
      pa[role] = 0;
    };
    assign(assign, 0, edges);
  }
  return best;
}

}  // namespace

std::optional<FlatOptimum> min_flat_decomposition(const admin::AccessMatrix& target, std::size_t max_roles) {
  const Target t = encode(target);
  const std::uint32_t all_perms = (1u << t.perms) - 1;
  for (std::size_t k = 1; k <= max_roles; ++k) {
    std::optional<std::size_t> best;
    std::vector<std::uint32_t> pa(k, 0);
    // Roles are interchangeable, so only non-decreasing masks are tried.
    auto assign = [&](auto&& self, std::size_t role, std::uint32_t from) -> void {
      if (role == k) {
        std::size_t grants = 0;
        for (auto m : pa) grants += static_cast<std::size_t>(std::popcount(m));
        if (auto ua = total_assignments(t, pa)) {
          if (!best || grants + *ua < *best) best = grants + *ua;
        }
        return;
      }
      for (std::uint32_t m = from; m <= all_perms; ++m) {
        pa[role] = m;
        self(self, role + 1, m);
      }
    };
    assign(assign, 0, 1);
    if (best) return FlatOptimum{k, *best};
  }
  return std::nullopt;
}

std::optional<std::size_t> min_decomposition(const admin::AccessMatrix& target, std::size_t max_roles) {
  return best_with_roles(encode(target), max_roles);
}

std::optional<FlatOptimum> min_roles_with_hierarchy(const admin::AccessMatrix& target, std::size_t max_roles) {
  const Target t = encode(target);
  for (std::size_t k = 1; k <= max_roles; ++k) {
    if (auto cost = best_with_roles(t, k)) return FlatOptimum{k, *cost};
  }
  return std::nullopt;
}

}  // namespace rbac::oracle
