#include <algorithm>

#include "rbac_oracle/oracle.hpp"

namespace rbac::oracle {

State State::from_tuples(const std::vector<Tuple>& tuples) {
  State s;
  for (const auto& t : tuples) {
    const auto& f = t.fields;
    const auto& r = t.relation;
    if (r == "user") s.users.insert(f[0]);
    else if (r == "role") s.roles.insert(f[0]);
    else if (r == "op") s.ops.insert(f[0]);
    else if (r == "obj") s.objs.insert(f[0]);
    else if (r == "session") s.session_user[f[0]] = f[1];
    else if (r == "ua") s.ua.emplace(f[0], f[1]);
    else if (r == "pa") s.pa.emplace(Permission{f[0], f[1]}, f[2]);
    else if (r == "rh") s.rh.emplace(f[0], f[1]);
    else if (r == "session_role") s.session_role.emplace(f[0], f[1]);
    else if (r == "ssd") s.ssd[f[0]].cardinality = std::stoul(f[1]);
    else if (r == "dsd") s.dsd[f[0]].cardinality = std::stoul(f[1]);
    else if (r == "ssd_role") s.ssd[f[0]].roles.insert(f[1]);
    else if (r == "dsd_role") s.dsd[f[0]].roles.insert(f[1]);
    else if (r == "disabled") s.disabled.insert(f[0]);
  }
  return s;
}

State State::from_snapshot(const Snapshot& snapshot) {
  std::vector<Tuple> all;
  for (const auto& r : snapshot.schema().relations()) {
    for (auto& t : snapshot.scan(r.name)) all.push_back(std::move(t));
  }
  return from_tuples(all);
}

std::set<Pair> closure(const std::set<std::string>& roles, const std::set<Pair>& edges) {
  std::vector<std::string> names(roles.begin(), roles.end());
  const std::size_t n = names.size();
  auto index = [&](const std::string& r) {
    return static_cast<std::size_t>(std::lower_bound(names.begin(), names.end(), r) - names.begin());
  };
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) reach[i][i] = 1;
  for (const auto& [a, b] : edges) {
    if (roles.contains(a) && roles.contains(b)) reach[index(a)][index(b)] = 1;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = 1;
      }
    }
  }
  std::set<Pair> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (reach[i][j]) out.emplace(names[i], names[j]);
    }
  }
  return out;
}

bool check_access(const State& state, const std::string& session, const Permission& p, bool hierarchical) {
  if (!state.session_user.contains(session)) return false;
  for (const auto& [s, active] : state.session_role) {
    if (s != session) continue;
    if (state.pa.contains({p, active})) return true;
    if (!hierarchical) continue;
    // Walk down the hierarchy from the active role.
    std::set<std::string> seen{active};
    std::vector<std::string> stack{active};
    while (!stack.empty()) {
      std::string r = stack.back();
      stack.pop_back();
      if (state.pa.contains({p, r})) return true;
      for (const auto& [senior, junior] : state.rh) {
        if (senior == r && seen.insert(junior).second) stack.push_back(junior);
      }
    }
  }
  return false;
}

bool check_access(const State& state, const std::string& session, const Permission& p) {
  return check_access(state, session, p, state.hierarchy());
}

std::vector<Finding> constraints(const State& s) {
  std::vector<Finding> out;
  auto role_ok = [&](const std::string& r) { return s.roles.contains(r); };

  bool dangling = false;
  for (const auto& [u, r] : s.ua) dangling |= !s.users.contains(u) || !role_ok(r);
  for (const auto& [p, r] : s.pa) dangling |= !s.ops.contains(p.operation) || !s.objs.contains(p.object) || !role_ok(r);
  for (const auto& [a, b] : s.rh) dangling |= !role_ok(a) || !role_ok(b);
  for (const auto& [sess, u] : s.session_user) dangling |= !s.users.contains(u);
  for (const auto& [sess, r] : s.session_role) dangling |= !s.session_user.contains(sess) || !role_ok(r);
  for (const auto* sets : {&s.ssd, &s.dsd}) {
    for (const auto& [name, set] : *sets) {
      for (const auto& r : set.roles) dangling |= !role_ok(r);
    }
  }
  if (dangling) out.push_back({"referential", ""});

  const auto geq = closure(s.roles, s.rh);
  for (const auto& [a, b] : geq) {
    if (a < b && geq.contains({b, a})) out.push_back({"acyclic", a});
  }

  if (!s.hierarchy() && !s.rh.empty()) out.push_back({"components", "hierarchy"});
  if (s.disabled.contains("ssd") && !s.ssd.empty()) out.push_back({"components", "ssd"});
  if (s.disabled.contains("dsd") && !s.dsd.empty()) out.push_back({"components", "dsd"});

  for (const auto* sets : {&s.ssd, &s.dsd}) {
    for (const auto& [name, set] : *sets) {
      if (set.roles.size() < 2 || set.cardinality < 2 || set.cardinality > set.roles.size()) {
        out.push_back({"sod-cardinality:" + name, name});
      }
    }
  }

  auto holds = [&](const std::string& user, const std::string& role) {
    for (const auto& [u, r] : s.ua) {
      if (u != user) continue;
      if (r == role) return true;
      if (s.hierarchy() && geq.contains({r, role})) return true;
    }
    return false;
  };

  for (const auto& [name, set] : s.ssd) {
    for (const auto& u : s.users) {
      std::size_t held = 0;
      for (const auto& r : set.roles) held += holds(u, r) ? 1 : 0;
      if (held >= set.cardinality) out.push_back({"ssd:" + name, u});
    }
  }
  for (const auto& [name, set] : s.dsd) {
    for (const auto& [sess, owner] : s.session_user) {
      std::size_t active = 0;
      for (const auto& r : set.roles) active += s.session_role.contains({sess, r}) ? 1 : 0;
      if (active >= set.cardinality) out.push_back({"dsd:" + name, sess});
    }
  }
  for (const auto& [sess, r] : s.session_role) {
    auto owner = s.session_user.find(sess);
    if (owner != s.session_user.end() && !holds(owner->second, r)) out.push_back({"session-soundness", sess});
  }
  return out;
}

std::string format_tuples(const std::set<Tuple>& tuples) {
  std::vector<std::string> lines;
  for (const auto& t : tuples) {
    std::string line = t.relation + "(";
    for (std::size_t i = 0; i < t.fields.size(); ++i) line += (i ? "," : "") + t.fields[i];
    lines.push_back(line + ")\n");
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l;
  return out;
}

std::string replay_deltas(const FactStore& store) {
  std::set<Tuple> state;
  const auto base = store.snapshot(store.oldest_version());
  for (const auto& r : base->schema().relations()) {
    for (auto& t : base->scan(r.name)) state.insert(std::move(t));
  }
  for (StateVersion v = store.oldest_version() + 1; v <= store.version(); ++v) {
    for (const auto& [relation, change] : store.delta(v)) {
      for (const auto& row : change.deletes) state.erase(Tuple{relation, row});
      for (const auto& row : change.inserts) state.insert(Tuple{relation, row});
    }
  }
  return format_tuples(state);
}

}  // namespace rbac::oracle
