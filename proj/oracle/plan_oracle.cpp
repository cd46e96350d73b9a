#include <algorithm>
#include <bit>
#include <cstdint>
#include <unordered_set>

#include "rbac_oracle/oracle.hpp"

namespace rbac::oracle {

namespace {

using Mask = std::uint64_t;
using admin::ActionKind;

struct Sod {
  Mask roles;
  std::size_t cardinality;
};

// Plan-relevant state as bitmasks: roles by slot, permissions restricted to
// the query's permissions. Sessions never block these actions and are left
// out.
struct Model {
  std::vector<std::string> names;  // role slot -> name
  Mask present = 0;
  std::vector<Mask> ua;            // per user
  std::vector<Mask> pa;            // per role slot: query permissions granted
  std::vector<Mask> rh;            // per role slot: direct juniors
  std::vector<Sod> ssd, dsd;
  std::size_t fresh_used = 0;

  std::string key() const {
    std::string k = std::to_string(fresh_used) + "|" + std::to_string(present);
    for (std::size_t i = 0; i < names.size(); ++i) {
      k += "|" + names[i] + ":" + std::to_string(pa[i]) + ":" + std::to_string(rh[i]);
    }
    for (auto m : ua) k += "|" + std::to_string(m);
    for (const auto& s : ssd) k += "|s" + std::to_string(s.roles);
    for (const auto& s : dsd) k += "|d" + std::to_string(s.roles);
    return k;
  }
};

struct Action {
  std::string text;
  ActionKind kind;
  std::size_t a = 0, b = 0;  // role slots / user / permission indices
};

class Search {
 public:
  Search(const State& source, const PlanQuery& q) : q_(q), hierarchy_(source.hierarchy()) {
    users_.assign(source.users.begin(), source.users.end());
    perms_.assign(q.perms.begin(), q.perms.end());
    target_user_ = static_cast<std::size_t>(std::find(users_.begin(), users_.end(), q.user) - users_.begin());
    source_roles_ = source.roles;

    m0_.names.assign(source.roles.begin(), source.roles.end());
    const std::size_t n = m0_.names.size();
    m0_.present = n == 64 ? ~Mask{0} : (Mask{1} << n) - 1;
    m0_.pa.assign(n, 0);
    m0_.rh.assign(n, 0);
    m0_.ua.assign(users_.size(), 0);
    for (const auto& [u, r] : source.ua) m0_.ua[user_index(u)] |= bit(slot(m0_, r));
    for (const auto& [p, r] : source.pa) {
      auto it = std::find(perms_.begin(), perms_.end(), p);
      if (it != perms_.end()) m0_.pa[slot(m0_, r)] |= Mask{1} << (it - perms_.begin());
    }
    for (const auto& [a, d] : source.rh) m0_.rh[slot(m0_, a)] |= bit(slot(m0_, d));
    for (const auto& [name, set] : source.ssd) m0_.ssd.push_back({roles_mask(set.roles), set.cardinality});
    for (const auto& [name, set] : source.dsd) m0_.dsd.push_back({roles_mask(set.roles), set.cardinality});
  }

  std::optional<std::vector<std::string>> run() {
    if (target_user_ == users_.size()) return std::nullopt;
    for (std::size_t depth = 0; depth <= q_.options.max_depth; ++depth) {
      failed_.clear();
      std::vector<std::string> path;
      if (dfs(m0_, depth, path)) return path;
    }
    return std::nullopt;
  }

 private:
  static Mask bit(std::size_t i) { return Mask{1} << i; }

  std::size_t user_index(const std::string& u) const {
    return static_cast<std::size_t>(std::find(users_.begin(), users_.end(), u) - users_.begin());
  }
  static std::size_t slot(const Model& m, const std::string& r) {
    return static_cast<std::size_t>(std::find(m.names.begin(), m.names.end(), r) - m.names.begin());
  }
  Mask roles_mask(const std::set<std::string>& roles) const {
    Mask out = 0;
    for (const auto& r : roles) out |= bit(slot(m0_, r));
    return out;
  }

  static Mask down(const Model& m, Mask from) {
    Mask seen = from;
    Mask frontier = from;
    while (frontier) {
      Mask next = 0;
      for (std::size_t i = 0; i < m.names.size(); ++i) {
        if (frontier >> i & 1) next |= m.rh[i];
      }
      frontier = next & ~seen;
      seen |= next;
    }
    return seen;
  }

  Mask held(const Model& m, std::size_t user) const { return hierarchy_ ? down(m, m.ua[user]) : m.ua[user]; }

  bool ssd_ok(const Model& m) const {
    for (std::size_t u = 0; u < users_.size(); ++u) {
      const Mask h = held(m, u);
      for (const auto& s : m.ssd) {
        if (static_cast<std::size_t>(std::popcount(h & s.roles)) >= s.cardinality) return false;
      }
    }
    return true;
  }

  bool goal(const Model& m) const {
    const Mask h = held(m, target_user_);
    Mask have = 0;
    for (std::size_t i = 0; i < m.names.size(); ++i) {
      if (h >> i & 1) have |= m.pa[i];
    }
    const Mask all = (Mask{1} << perms_.size()) - 1;
    return q_.grant ? (have & all) == all : (have & all) == 0;
  }

  bool fresh(const Model& m, std::size_t r) const { return !source_roles_.contains(m.names[r]); }
  bool confined(const Model& m, std::size_t r) const { return !q_.options.confine_to_fresh || fresh(m, r); }
  bool allowed(ActionKind k) const { return q_.options.alphabet.contains(k); }

  std::vector<Action> actions(const Model& m) const {
    std::vector<Action> out;
    const std::string& user = users_[target_user_];
    auto live = [&](std::size_t r) { return (m.present >> r & 1) != 0; };
    for (std::size_t r = 0; r < m.names.size(); ++r) {
      if (!live(r)) continue;
      const bool has = (m.ua[target_user_] >> r & 1) != 0;
      if (allowed(ActionKind::AssignUser) && !has) {
        out.push_back({"AssignUser " + user + " " + m.names[r], ActionKind::AssignUser, r});
      }
      if (allowed(ActionKind::DeassignUser) && has) {
        out.push_back({"DeassignUser " + user + " " + m.names[r], ActionKind::DeassignUser, r});
      }
      if (!confined(m, r)) continue;
      for (std::size_t p = 0; p < perms_.size(); ++p) {
        const bool granted = (m.pa[r] >> p & 1) != 0;
        if (allowed(ActionKind::GrantPermission) && !granted) {
          out.push_back({"GrantPermission " + perms_[p].str() + " " + m.names[r], ActionKind::GrantPermission, r, p});
        }
        if (allowed(ActionKind::RevokePermission) && granted) {
          out.push_back(
              {"RevokePermission " + perms_[p].str() + " " + m.names[r], ActionKind::RevokePermission, r, p});
        }
      }
      if (allowed(ActionKind::DeleteRole)) out.push_back({"DeleteRole " + m.names[r], ActionKind::DeleteRole, r});
      if (!hierarchy_) continue;
      for (std::size_t d = 0; d < m.names.size(); ++d) {
        if (d == r || !live(d)) continue;
        const bool edge = (m.rh[r] >> d & 1) != 0;
        if (allowed(ActionKind::AddInheritance) && !edge) {
          out.push_back({"AddInheritance " + m.names[r] + " " + m.names[d], ActionKind::AddInheritance, r, d});
        }
        if (allowed(ActionKind::DeleteInheritance) && edge) {
          out.push_back({"DeleteInheritance " + m.names[r] + " " + m.names[d], ActionKind::DeleteInheritance, r, d});
        }
      }
    }
    if (allowed(ActionKind::AddRole) && m.fresh_used < q_.options.fresh_role_cap) {
      std::set<std::string> taken;
      for (std::size_t r = 0; r < m.names.size(); ++r) {
        if (live(r)) taken.insert(m.names[r]);
      }
      std::size_t k = 1;
      while (taken.contains("role_" + std::to_string(k))) ++k;
      out.push_back({"AddRole role_" + std::to_string(k), ActionKind::AddRole});
    }
    std::sort(out.begin(), out.end(), [](const Action& x, const Action& y) { return x.text < y.text; });
    return out;
  }

  std::optional<Model> apply(const Model& m, const Action& a) const {
    Model n = m;
    const std::size_t u = target_user_;
    switch (a.kind) {
      case ActionKind::AssignUser:
        n.ua[u] |= bit(a.a);
        if (!ssd_ok(n)) return std::nullopt;
        break;
      case ActionKind::DeassignUser:
        n.ua[u] &= ~bit(a.a);
        break;
      case ActionKind::GrantPermission:
        n.pa[a.a] |= bit(a.b);
        break;
      case ActionKind::RevokePermission:
        n.pa[a.a] &= ~bit(a.b);
        break;
      case ActionKind::AddRole: {
        n.names.push_back(a.text.substr(std::string("AddRole ").size()));
        n.present |= bit(n.names.size() - 1);
        n.pa.push_back(0);
        n.rh.push_back(0);
        ++n.fresh_used;
        break;
      }
      case ActionKind::DeleteRole: {
        for (auto* sets : {&n.ssd, &n.dsd}) {
          for (auto& s : *sets) {
            if (!(s.roles >> a.a & 1)) continue;
            s.roles &= ~bit(a.a);
            const auto left = static_cast<std::size_t>(std::popcount(s.roles));
            if (left < 2 || left < s.cardinality) return std::nullopt;
          }
        }
        n.present &= ~bit(a.a);
        for (auto& mask : n.ua) mask &= ~bit(a.a);
        for (auto& mask : n.rh) mask &= ~bit(a.a);
        n.rh[a.a] = 0;
        n.pa[a.a] = 0;
        break;
      }
      case ActionKind::AddInheritance:
        if (down(m, bit(a.b)) >> a.a & 1) return std::nullopt;  // would close a cycle
        n.rh[a.a] |= bit(a.b);
        if (!ssd_ok(n)) return std::nullopt;
        break;
      case ActionKind::DeleteInheritance:
        n.rh[a.a] &= ~bit(a.b);
        break;
    }
    return n;
  }

  bool dfs(const Model& m, std::size_t left, std::vector<std::string>& path) {
    if (left == 0) return goal(m);
    // A state that failed with this much depth left fails again.
    std::string k = std::to_string(left) + "#" + m.key();
    if (failed_.contains(k)) return false;
    for (const auto& a : actions(m)) {
      auto next = apply(m, a);
      if (!next) continue;
      path.push_back(a.text);
      if (dfs(*next, left - 1, path)) return true;
      path.pop_back();
    }
    failed_.insert(std::move(k));
    return false;
  }

  const PlanQuery& q_;
  bool hierarchy_;
  std::vector<std::string> users_;
  std::vector<Permission> perms_;
  std::size_t target_user_ = 0;
  std::set<std::string> source_roles_;
  Model m0_;
  std::unordered_set<std::string> failed_;
};

}  // namespace

std::optional<std::vector<std::string>> shortest_plan(const State& source, const PlanQuery& query) {
  return Search(source, query).run();
}

}  // namespace rbac::oracle
