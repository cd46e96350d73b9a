#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cli_internal.hpp"
#include "rbac_oracle/oracle.hpp"

namespace rbac::cli {

namespace {

NameSet name_set(const std::string& literal) {
  auto items = split_set(literal);
  return NameSet(items.begin(), items.end());
}

PermissionSet permission_set(const std::string& literal) {
  PermissionSet out;
  for (const auto& item : split_set(literal)) out.insert(Permission::parse(item));
  return out;
}

admin::AccessMatrix target_of(const std::vector<std::string>& args) {
  admin::AccessMatrix out;
  for (std::size_t i = 0; i + 1 < args.size(); i += 2) {
    for (const auto& p : permission_set(args[i + 1])) out.emplace(args[i], p);
  }
  return out;
}

Outcome committed(StateVersion v) {
  Outcome o;
  o.message = "ok " + std::to_string(v);
  return o;
}

Outcome done(std::string message) {
  Outcome o;
  o.message = std::move(message);
  return o;
}

Outcome query(std::vector<std::string> items) {
  Outcome o;
  o.is_query = true;
  o.items = std::move(items);
  return o;
}

Outcome query(const NameSet& names) { return query(std::vector<std::string>(names.begin(), names.end())); }

Outcome query(const PermissionSet& perms) {
  std::vector<std::string> items;
  for (const auto& p : perms) items.push_back(p.str());
  return query(std::move(items));
}

Outcome query(const std::map<std::string, std::size_t>& counts) {
  std::vector<std::string> items;
  for (const auto& [k, n] : counts) items.push_back(k + " " + std::to_string(n));
  return query(std::move(items));
}

Outcome query(bool value) { return query(std::vector<std::string>{value ? "true" : "false"}); }

Outcome failure(const RbacError& e) {
  Outcome o;
  o.status = Outcome::Status::Error;
  o.code = e.code();
  o.message = e.detail();
  if (e.violation()) {
    for (const auto& t : e.violation()->witness) o.witness.push_back(format_tuple(t));
  }
  return o;
}

[[noreturn]] void mismatch(const std::string& what) { throw RbacError(ErrorCode::OracleMismatch, what); }

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

Outcome decomposition_outcome(const admin::RoleDecomposition& d, std::size_t cost) {
  std::vector<std::string> items;
  for (const auto& r : d.roles) items.push_back("AddRole " + r);
  for (const auto& [s, j] : d.rh) items.push_back("AddInheritance " + s + " " + j);
  for (const auto& [p, r] : d.pa) items.push_back("GrantPermission " + p.str() + " " + r);
  for (const auto& [u, r] : d.ua) items.push_back("AssignUser " + u + " " + r);
  Outcome o = query(std::move(items));
  o.notes.push_back("# roles=" + std::to_string(d.roles.size()) + " ua=" + std::to_string(d.ua.size()) +
                    " pa=" + std::to_string(d.pa.size()) + " rh=" + std::to_string(d.rh.size()) +
                    " edges=" + std::to_string(d.cost()) + " cost=" + std::to_string(cost));
  o.cost = cost;
  return o;
}

Outcome plan_outcome(const admin::AdminPlan& plan) {
  std::vector<std::string> items;
  for (const auto& s : plan.steps) items.push_back(s.encode());
  Outcome o = query(std::move(items));
  o.notes.push_back("# length " + std::to_string(plan.cost()));
  o.cost = plan.cost();
  return o;
}

std::string set_text(const std::vector<std::string>& items) {
  std::string out = "{";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out + "}";
}

}  // namespace

int Summary::exit_code() const {
  if (io_errors) return 4;
  if (assert_failures) return 3;
  if (errors) return 1;
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RbacError(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RbacError(ErrorCode::IoError, "cannot write " + path);
  out << content;
  if (!out) throw RbacError(ErrorCode::IoError, "cannot write " + path);
}

Runner::Runner(RunOptions options) : options_(options), rules_(rules::builtin_library()) {}

void Runner::load_rules_text(std::string_view text) { rules_ = rules_.with_rules(rules::parse_rules(text)); }

void Runner::audit(const Command& command, const Outcome& outcome) {
  if (!audit_) return;
  *audit_ << engine_.version() << '\t' << command.text << '\t'
          << (outcome.status == Outcome::Status::Ok ? std::string("ok")
                                                    : "error:" + std::string(to_string(*outcome.code)))
          << '\n';
}

Outcome Runner::execute(const Command& command) {
  Outcome out;
  try {
    out = command.verb == "ASSERT" ? assertion(command) : dispatch(command);
  } catch (const RbacError& e) {
    out = failure(e);
  }
  if (command.verb != "ASSERT" && is_mutation(command)) audit(command, out);
  return out;
}

Outcome Runner::assertion(const Command& command) {
  const Assertion& a = *command.assertion;
  Outcome inner;
  try {
    inner = dispatch(*a.inner);
  } catch (const RbacError& e) {
    inner = failure(e);
  }
  if (is_mutation(*a.inner)) audit(*a.inner, inner);

  const bool ok = inner.status == Outcome::Status::Ok;
  std::string got = ok ? (inner.is_query ? set_text(inner.items) : inner.message)
                       : "error " + std::string(to_string(*inner.code)) + ": " + inner.message;
  std::string expected;
  bool pass = false;
  switch (a.mode) {
    case Assertion::Mode::Ok:
      pass = ok;
      expected = "success";
      break;
    case Assertion::Mode::Fails:
      pass = !ok && to_string(*inner.code) == a.expected;
      expected = "error " + a.expected;
      break;
    case Assertion::Mode::Count:
      pass = ok && inner.is_query && inner.items.size() == to_natural(a.expected);
      expected = a.expected + " items";
      if (ok && inner.is_query) got = std::to_string(inner.items.size()) + " items";
      break;
    case Assertion::Mode::Cost:
      pass = ok && inner.cost && *inner.cost == to_natural(a.expected);
      expected = "cost " + a.expected;
      if (ok && inner.cost) got = "cost " + std::to_string(*inner.cost);
      break;
    case Assertion::Mode::Equals: {
      std::vector<std::string> want;
      if (a.expected.front() == '{' && a.expected.back() == '}') {
        want = split_set(a.expected);
      } else {
        want = {a.expected};
      }
      std::sort(want.begin(), want.end());
      want.erase(std::unique(want.begin(), want.end()), want.end());
      auto have = inner.items;
      std::sort(have.begin(), have.end());
      pass = ok && inner.is_query && have == want;
      expected = set_text(want);
      break;
    }
  }
  if (pass) return done("pass");
  Outcome o;
  o.status = Outcome::Status::AssertFailed;
  o.code = ErrorCode::AssertFailed;
  o.message = "expected " + expected + ", got " + got;
  return o;
}

Outcome Runner::dispatch(const Command& c) {
  const std::string& v = c.verb;
  const auto& a = c.args;
  Engine& e = engine_;
  auto arg_perm = [&](std::size_t i) { return Permission::parse(a.at(i)); };

  auto commit = [&](StateVersion version) {
    if (options_.oracle) {
      auto findings = oracle::constraints(oracle::State::from_snapshot(*e.store().snapshot()));
      if (!findings.empty()) {
        mismatch("committed state violates " + findings.front().constraint + " (" + findings.front().subject + ")");
      }
    }
    return committed(version);
  };

  // Core.
  if (v == "AddUser") return commit(e.add_user(a[0]));
  if (v == "DeleteUser") return commit(e.delete_user(a[0]));
  if (v == "AddRole") return commit(e.add_role(a[0]));
  if (v == "DeleteRole") return commit(e.delete_role(a[0]));
  if (v == "AddOperation") return commit(e.add_operation(a[0]));
  if (v == "AddObject") return commit(e.add_object(a[0]));
  if (v == "AssignUser") return commit(e.assign_user(a[0], a[1]));
  if (v == "DeassignUser") return commit(e.deassign_user(a[0], a[1]));
  if (v == "GrantPermission") return commit(e.grant_permission(arg_perm(0), a[1]));
  if (v == "RevokePermission") return commit(e.revoke_permission(arg_perm(0), a[1]));
  if (v == "CreateSession") return commit(e.create_session(a[0], a[1], name_set(a[2])));
  if (v == "DeleteSession") return commit(e.delete_session(a[0], a[1]));
  if (v == "AddActiveRole") return commit(e.add_active_role(a[0], a[1], a[2]));
  if (v == "DropActiveRole") return commit(e.drop_active_role(a[0], a[1], a[2]));
  if (v == "CheckAccess") {
    const bool granted = e.check_access(a[0], arg_perm(1));
    if (options_.oracle) {
      const auto state = oracle::State::from_snapshot(*e.store().snapshot());
      if (oracle::check_access(state, a[0], arg_perm(1)) != granted) mismatch("CheckAccess disagrees with oracle");
    }
    return query(granted);
  }
  if (v == "AssignedUsers") return query(e.assigned_users(a[0]));
  if (v == "AssignedRoles") return query(e.assigned_roles(a[0]));
  if (v == "RolePermissions") return query(e.role_permissions(a[0]));
  if (v == "UserPermissions") return query(e.user_permissions(a[0]));
  if (v == "SessionRoles") return query(e.session_roles(a[0]));
  if (v == "SessionPermissions") return query(e.session_permissions(a[0]));
  if (v == "CountUsersPerRole") return query(e.count_users_per_role());
  if (v == "CountRolesPerUser") return query(e.count_roles_per_user());

  // Hierarchy.
  if (v == "AddInheritance") return commit(e.add_inheritance(a[0], a[1]));
  if (v == "DeleteInheritance") return commit(e.delete_inheritance(a[0], a[1]));
  if (v == "AddAscendant") return commit(e.add_ascendant(a[0], a[1]));
  if (v == "AddDescendant") return commit(e.add_descendant(a[0], a[1]));
  if (v == "AuthorizedUsers") return query(e.authorized_users(a[0]));
  if (v == "AuthorizedRoles") return query(e.authorized_roles(a[0]));
  if (v == "AuthorizedPermissions") return query(e.authorized_permissions(a[0]));
  if (v == "ActivationEligible") {
    e.assigned_roles(a[0]);  // entity checks
    e.assigned_users(a[1]);
    return query(e.view().activation_eligible(a[0], a[1]));
  }
  if (v == "Closure") {
    auto items = lines_of(e.closure_dump());
    if (options_.oracle) {
      const auto state = oracle::State::from_snapshot(*e.store().snapshot());
      std::vector<std::string> expected;
      for (const auto& [s, j] : oracle::closure(state.roles, state.rh)) expected.push_back("geq(" + s + "," + j + ")");
      auto sorted = items;
      std::sort(sorted.begin(), sorted.end());
      std::sort(expected.begin(), expected.end());
      if (sorted != expected) mismatch("closure disagrees with oracle");
    }
    return query(std::move(items));
  }

  // Separation of duty.
  if (v == "CreateSsdSet") return commit(e.create_ssd_set(a[0], name_set(a[1]), to_natural(a[2])));
  if (v == "CreateDsdSet") return commit(e.create_dsd_set(a[0], name_set(a[1]), to_natural(a[2])));
  if (v == "AddSodRoleMember") return commit(e.add_sod_role_member(a[0], a[1]));
  if (v == "DeleteSodRoleMember") return commit(e.delete_sod_role_member(a[0], a[1]));
  if (v == "SetSodCardinality") return commit(e.set_sod_cardinality(a[0], to_natural(a[1])));
  if (v == "SodSets") return query(e.sod_sets(a[0] == "ssd" ? SodFlavor::Ssd : SodFlavor::Dsd));
  if (v == "SodSetRoles") return query(e.sod_set_roles(a[0]));
  if (v == "SodSetCardinality") return query(std::vector<std::string>{std::to_string(e.sod_set_cardinality(a[0]))});

  // Administrative analysis.
  if (v == "MinimizeRoles" || v == "MinimizeAssignmentsWithHierarchy") {
    const auto target = target_of(a);
    const bool flat = v == "MinimizeRoles";
    admin::MinimizeOptions opts{options_.role_cap, options_.objective, e.view().roles()};
    auto d = flat ? admin::minimize_roles(target, opts.reserved) : admin::minimize_assignments(target, opts);
    const bool by_roles = flat || options_.objective == admin::Objective::Roles;
    const std::size_t cost = by_roles ? d.roles.size() : d.cost();
    if (options_.oracle) {
      if (admin::induced_relation(d) != target) mismatch("decomposition does not realize the target exactly");
      std::set<std::string> users;
      std::set<Permission> perms;
      for (const auto& [u, p] : target) {
        users.insert(u);
        perms.insert(p);
      }
      if (users.size() <= 5 && perms.size() <= 5) {
        if (flat) {
          auto best = oracle::min_flat_decomposition(target, users.size());
          if (!best || best->roles != d.roles.size() || best->edges != d.cost()) mismatch("MinimizeRoles is not optimal");
        } else if (options_.role_cap <= 4) {
          if (by_roles) {
            auto best = oracle::min_roles_with_hierarchy(target, options_.role_cap);
            if (!best || best->roles != d.roles.size() || best->edges != d.cost()) mismatch("minimization is not optimal");
          } else {
            auto best = oracle::min_decomposition(target, options_.role_cap);
            if (!best || *best != d.cost()) mismatch("minimization is not optimal");
          }
        }
      }
    }
    return decomposition_outcome(d, cost);
  }
  if (v == "GetRolesShortestPlan" || v == "GetRevocationShortestPlan") {
    const bool grant = v == "GetRolesShortestPlan";
    auto opts = grant ? admin::PlanOptions::grant_defaults() : admin::PlanOptions::revocation_defaults();
    if (grant) opts.fresh_role_cap = options_.fresh_role_cap;
    opts.max_depth = options_.plan_depth;
    const auto perms = permission_set(a[1]);
    std::optional<admin::AdminPlan> plan;
    std::optional<RbacError> error;
    try {
      plan = grant ? admin::shortest_grant_plan(e, a[0], perms, opts)
                   : admin::shortest_revocation_plan(e, a[0], perms, opts);
    } catch (const RbacError& err) {
      if (err.code() != ErrorCode::NoPlan && err.code() != ErrorCode::DepthExceeded) throw;
      error = err;
    }
    if (options_.oracle) {
      oracle::PlanQuery q{grant, a[0], perms, opts};
      auto expected = oracle::shortest_plan(oracle::State::from_snapshot(*e.store().snapshot()), q);
      std::vector<std::string> got;
      if (plan) {
        for (const auto& s : plan->steps) got.push_back(s.encode());
        Engine replay = e.fork();
        for (const auto& s : plan->steps) admin::apply_action(replay, s);
      }
      if (plan.has_value() != expected.has_value() || (expected && *expected != got)) {
        mismatch("plan disagrees with the exhaustive search");
      }
    }
    if (error) throw *error;
    return plan_outcome(*plan);
  }

  // Shell commands.
  if (v == "Scan") {
    std::vector<std::string> items;
    std::optional<StateVersion> version;
    if (a.size() > 1) version = to_natural(a[1]);
    for (const auto& t : e.store().scan(a[0], version)) items.push_back(format_tuple(t));
    return query(std::move(items));
  }
  if (v == "Version") return query(std::vector<std::string>{std::to_string(e.version())});
  if (v == "LOAD") return commit(e.load(parse_snapshot_text(read_file(a[0]))));
  if (v == "DUMP") {
    if (a.empty()) return query(lines_of(e.dump()));
    write_file(a[0], e.dump());
    return done("wrote " + a[0]);
  }
  if (v == "PRAGMA") {
    const std::string& key = a[0];
    if (key == "components") {
      Components comp = Components::core_only();
      for (std::size_t i = 1; i < a.size(); ++i) {
        std::string_view rest = a[i];
        while (!rest.empty()) {
          auto comma = rest.find(',');
          auto item = rest.substr(0, comma);
          if (item == "hierarchy") comp.hierarchy = true;
          if (item == "ssd") comp.ssd = true;
          if (item == "dsd") comp.dsd = true;
          rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
      }
      return commit(e.set_components(comp));
    }
    if (key == "fresh-role-cap") options_.fresh_role_cap = to_natural(a[1]);
    if (key == "plan-depth") options_.plan_depth = to_natural(a[1]);
    if (key == "role-cap") options_.role_cap = to_natural(a[1]);
    if (key == "objective") options_.objective = a[1] == "roles" ? admin::Objective::Roles : admin::Objective::Edges;
    return done("ok");
  }
  if (v == "RULES") {
    const std::string& sub = a[0];
    if (sub == "builtin") {
      rules_ = rules::builtin_library();
      return done("ok " + std::to_string(rules_.rules().size()) + " rules");
    }
    if (sub == "load" || sub == "add") {
      const std::size_t before = rules_.rules().size();
      load_rules_text(sub == "load" ? read_file(a[1]) : a[1]);
      return done("ok " + std::to_string(rules_.rules().size() - before) + " rules added");
    }
    if (sub == "list") {
      std::vector<std::string> items;
      for (const auto& r : rules_.rules()) items.push_back(r.str());
      return query(std::move(items));
    }
    // eval
    const std::string& relation = a[1];
    if (!rules_.idb().contains(relation)) {
      throw RbacError(ErrorCode::UnknownRelation, relation + " is not defined by any rule");
    }
    auto result = rules::evaluate_seminaive(rules_, e.store(), e.version());
    if (options_.oracle && rules::evaluate(rules_, e.store(), e.version()) != result) {
      mismatch("semi-naive evaluation disagrees with naive evaluation");
    }
    std::vector<std::string> items;
    for (const auto& row : result[relation]) items.push_back(format_tuple(relation, row));
    return query(std::move(items));
  }
  throw RbacError(ErrorCode::ParseError, "unknown verb " + v);
}

std::string render(const Command& command, const Outcome& o) {
  std::string out = "> " + command.text + "\n";
  switch (o.status) {
    case Outcome::Status::Ok:
      if (o.is_query) {
        if (o.items.empty()) out += "  (none)\n";
        for (const auto& item : o.items) out += "  " + item + "\n";
        for (const auto& note : o.notes) out += "  " + note + "\n";
      } else {
        out += o.message + "\n";
      }
      break;
    case Outcome::Status::Error:
    case Outcome::Status::AssertFailed:
      out += "error " + std::string(to_string(*o.code)) + ": " + o.message + "\n";
      for (const auto& w : o.witness) out += "  witness " + w + "\n";
      break;
  }
  return out;
}

Summary Runner::run(const std::vector<Command>& commands, std::ostream& out) {
  Summary s;
  for (const auto& c : commands) {
    Outcome o = execute(c);
    out << render(c, o);
    ++s.commands;
    if (o.status == Outcome::Status::AssertFailed) ++s.assert_failures;
    if (o.status == Outcome::Status::Error) {
      ++s.errors;
      if (o.code == ErrorCode::IoError) ++s.io_errors;
    }
    if (o.status != Outcome::Status::Ok && options_.halt_on_error) {
      s.halted = true;
      break;
    }
  }
  out << "# " << s.commands << " commands, " << s.errors << " errors, " << s.assert_failures
      << " assertion failures" << (s.halted ? ", halted" : "") << "\n";
  return s;
}

void replay_audit(Runner& runner, std::string_view text) {
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = line.rfind('\t');
    if (t1 == std::string::npos || t1 == t2) {
      throw RbacError(ErrorCode::ParseError, "audit line " + std::to_string(line_no) + ": expected three fields");
    }
    if (line.substr(t2 + 1) != "ok") continue;
    const std::string version = line.substr(0, t1);
    const Command cmd = parse_command(line.substr(t1 + 1, t2 - t1 - 1), line_no);
    Outcome o = runner.execute(cmd);
    if (o.status != Outcome::Status::Ok || std::to_string(runner.engine().version()) != version) {
      throw RbacError(ErrorCode::AssertFailed, "audit line " + std::to_string(line_no) + " diverged: " +
                                                   render(cmd, o));
    }
  }
}

}  // namespace rbac::cli
