// Acceptance run: one PASS/FAIL line per criterion, each with its own time
// budget. `acceptance 3 7` runs a subset. Seeds are fixed.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

#include "generators.hpp"
#include "golden.hpp"
#include "rbac/admin_search.hpp"
#include "rbac/cli.hpp"
#include "rbac/rule_engine.hpp"
#include "rbac_oracle/oracle.hpp"

using namespace rbac;
using namespace rbac::testing;

namespace {

const fs::path kGoldenDir = RBAC_GOLDEN_DIR;

struct Result {
  bool ok = true;
  std::string summary;  // counts shown on the PASS/FAIL line
  std::string failure;  // first problem found
};

// Records the first failure and keeps going so the counts stay meaningful.
void fail(Result& r, const std::string& what) {
  if (r.ok) r.failure = what;
  r.ok = false;
}

std::set<oracle::Pair> maintained_closure(const PolicyView& view) {
  const auto pairs = view.closure().pairs();
  return {pairs.begin(), pairs.end()};
}

// 1. ClosureIndex, rule-engine geq and Floyd-Warshall agree on every version.
Result closure_equivalence() {
  Rng rng(1001);
  Result r;
  const auto program = rules::builtin_library();
  std::size_t versions = 0, edges_total = 0, rejected = 0;
  for (int dag = 0; dag < 500; ++dag) {
    Engine e;
    const std::size_t roles = between(rng, 2, 50);
    for (std::size_t i = 0; i < roles; ++i) e.add_role(name('r', i));
    const std::size_t max_edges = std::min<std::size_t>(200, roles * (roles - 1) / 2);
    for (const auto& [a, b] : random_dag(rng, roles, between(rng, 0, max_edges))) {
      e.add_inheritance(a, b);
      // The reverse edge closes a cycle and must not commit.
      if (chance(rng, 0.1)) {
        const auto v = e.version();
        if (error_of([&] { e.add_inheritance(b, a); }) != ErrorCode::CycleDetected || e.version() != v) {
          fail(r, "dag " + std::to_string(dag) + ": reverse edge " + b + "->" + a + " accepted");
        }
        ++rejected;
      }
    }
    edges_total += e.store().snapshot()->rows("rh").size();

    for (StateVersion v = 0; v <= e.version(); ++v) {
      const auto view = e.view(v);
      const auto state = oracle::State::from_snapshot(view.snapshot());
      const auto expected = oracle::closure(state.roles, state.rh);
      const auto db = rules::evaluate_seminaive(program, e.store(), v);
      std::set<oracle::Pair> derived;
      for (const auto& row : db.at("geq")) derived.emplace(row[0], row[1]);
      if (maintained_closure(view) != expected) fail(r, "dag " + std::to_string(dag) + " v" + std::to_string(v) + ": index");
      if (derived != expected) fail(r, "dag " + std::to_string(dag) + " v" + std::to_string(v) + ": rules");
      ++versions;
    }
  }
  r.summary = "500 DAGs, " + std::to_string(edges_total) + " edges, " + std::to_string(versions) + " versions, " +
              std::to_string(rejected) + " cycles refused";
  return r;
}

// 2. Naive and semi-naive evaluation reach the same fixpoint.
Result naive_seminaive() {
  Rng rng(1002);
  Result r;
  std::size_t derived = 0;
  for (int i = 0; i < 200; ++i) {
    const auto p = random_program(rng, 8, 200);
    const rules::RuleProgram program(p.rules, p.edb);
    const auto naive = rules::evaluate(program, p.facts);
    const auto semi = rules::evaluate_seminaive(program, p.facts);
    if (naive != semi) fail(r, "program " + std::to_string(i));
    for (const auto& [rel, rows] : naive) {
      if (!p.edb.contains(rel)) derived += rows.size();
    }
  }
  r.summary = "200 programs, " + std::to_string(derived) + " derived tuples";
  return r;
}

// 3. CheckAccess against the unfolded definition, core and hierarchical.
Result check_access_probes() {
  Rng rng(1003);
  Result r;
  std::size_t probes = 0, granted = 0, core = 0;
  while (probes < 10000) {
    Engine e;
    const PolicyShape shape{.users = between(rng, 1, 6),
                            .roles = between(rng, 1, 12),
                            .ops = between(rng, 1, 3),
                            .objs = between(rng, 1, 3),
                            .sessions = between(rng, 1, 5),
                            .hierarchy = chance(rng, 0.6)};
    const auto perms = random_policy(e, rng, shape);
    const auto state = oracle::State::from_snapshot(*e.store().snapshot());
    const auto view = e.view();
    for (const auto& s : view.sessions()) {
      for (const auto& p : perms) {
        const bool expected = oracle::check_access(state, s, p, shape.hierarchy);
        if (e.check_access(s, p) != expected) fail(r, "CheckAccess " + s + " " + p.str());
        // Both semantics are probed on every state.
        if (view.check_access_core(s, p) != oracle::check_access(state, s, p, false)) fail(r, "core " + s + " " + p.str());
        if (view.check_access_hierarchical(s, p) != oracle::check_access(state, s, p, true)) {
          fail(r, "hierarchical " + s + " " + p.str());
        }
        ++probes;
        granted += expected;
        core += !shape.hierarchy;
      }
    }
  }
  r.summary = std::to_string(probes) + " probes (" + std::to_string(core) + " on core-only states), " +
              std::to_string(granted) + " granted";
  return r;
}

// True when the witness edges contain a cycle and every edge but the
// attempted first one was already in rh.
bool witness_is_cycle(const Violation& v, const oracle::State& before) {
  if (v.witness.empty()) return false;
  std::set<std::string> roles;
  std::set<oracle::Pair> edges;
  for (std::size_t i = 0; i < v.witness.size(); ++i) {
    const auto& t = v.witness[i];
    if (t.relation != "rh" || t.fields.size() != 2) return false;
    if (i > 0 && !before.rh.contains({t.fields[0], t.fields[1]})) return false;
    roles.insert(t.fields.begin(), t.fields.end());
    edges.emplace(t.fields[0], t.fields[1]);
  }
  const auto geq = oracle::closure(roles, edges);
  for (const auto& [a, b] : edges) {
    if (geq.contains({b, a})) return true;
  }
  return false;
}

struct FuzzStats {
  std::size_t runs = 0, commits = 0, rejected = 0, witnesses = 0, replayed = 0;
  double replay_seconds = 0;
  Result atomicity;
};

// 4 and 5. Random command runs: committed states are clean, rejections are
// no-ops with honest witnesses, and folding the deltas rebuilds the state.
Result constraint_fuzz(FuzzStats& stats) {
  Rng rng(1004);
  Result r;
  for (int run = 0; run < 5000; ++run) {
    Engine e;
    for (const auto& step : random_commands(rng, between(rng, 20, 40))) {
      const std::string before = e.dump();
      try {
        step.apply(e);
      } catch (const RbacError& err) {
        ++stats.rejected;
        if (e.dump() != before) fail(r, "run " + std::to_string(run) + ": rejected " + step.text + " changed state");
        if (!err.violation()) continue;
        ++stats.witnesses;
        const Violation& v = *err.violation();
        const auto state = oracle::State::from_snapshot(*e.store().snapshot());
        if (v.constraint == "acyclic") {
          if (!witness_is_cycle(v, state)) fail(r, step.text + ": witness is not a cycle");
          continue;
        }
        // Forced through with checks off, the oracle must see the violation.
        Engine forced = e.fork();
        forced.set_constraint_checks(false);
        if (!attempt([&] { step.apply(forced); })) {
          fail(r, step.text + ": fails even with checks off");
          continue;
        }
        const auto findings = oracle::constraints(oracle::State::from_snapshot(*forced.store().snapshot()));
        if (std::find(findings.begin(), findings.end(), oracle::Finding{v.constraint, v.subject}) == findings.end()) {
          fail(r, step.text + ": oracle does not confirm " + v.constraint + " by " + v.subject);
        }
        continue;
      }
      ++stats.commits;
      const auto findings = oracle::constraints(oracle::State::from_snapshot(*e.store().snapshot()));
      if (!findings.empty()) fail(r, "after " + step.text + ": " + findings.front().constraint);
    }
    const auto start = std::chrono::steady_clock::now();
    if (oracle::replay_deltas(e.store()) == e.dump()) {
      ++stats.replayed;
    } else {
      fail(stats.atomicity, "run " + std::to_string(run) + ": replayed deltas differ");
    }
    stats.replay_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ++stats.runs;
  }
  r.summary = std::to_string(stats.runs) + " runs, " + std::to_string(stats.commits) + " commits, " +
              std::to_string(stats.rejected) + " rejections, " + std::to_string(stats.witnesses) +
              " witnesses re-verified";
  stats.atomicity.summary =
      std::to_string(stats.replayed) + "/" + std::to_string(stats.runs) + " runs rebuilt from their deltas";
  return r;
}

// 6. Planner lengths against iterative deepening; plans replay.
Result planner_optimality() {
  Rng rng(1006);
  Result r;
  std::size_t found = 0, none = 0, same_plan = 0;
  std::map<std::size_t, std::size_t> lengths;
  for (int i = 0; i < 300; ++i) {
    Engine e;
    const std::size_t roles = between(rng, 1, 4);
    const PolicyShape shape{.users = between(rng, 1, 4),
                            .roles = roles,
                            .ops = between(rng, 1, 2),
                            .objs = between(rng, 1, 3),
                            .sessions = 0,
                            .hierarchy = true};
    const auto perms = random_policy(e, rng, shape);
    if (roles >= 2 && chance(rng, 0.3)) attempt([&] { e.create_ssd_set("x", {"r0", "r1"}, 2); });

    const bool grant = chance(rng, 0.5);
    auto options = grant ? admin::PlanOptions::grant_defaults() : admin::PlanOptions::revocation_defaults();
    options.max_depth = between(rng, 1, 4);
    if (grant) options.fresh_role_cap = std::min<std::size_t>(between(rng, 0, 2), 6 - roles);
    const std::string user = name('u', pick(rng, shape.users));
    // Goals the user does not already meet, so most plans have steps.
    if (!grant) {
      const auto r = name('r', pick(rng, roles));
      attempt([&] { e.grant_permission(perms[pick(rng, perms.size())], r); });
      attempt([&] { e.assign_user(user, r); });
    }
    std::vector<Permission> candidates;
    for (const auto& p : perms) {
      if (e.view().user_has_permission(user, p) != grant) candidates.push_back(p);
    }
    if (candidates.empty()) candidates = perms;
    PermissionSet goal{candidates[pick(rng, candidates.size())]};
    if (chance(rng, 0.3)) goal.insert(candidates[pick(rng, candidates.size())]);

    std::optional<admin::AdminPlan> plan;
    try {
      plan = grant ? admin::shortest_grant_plan(e, user, goal, options)
                   : admin::shortest_revocation_plan(e, user, goal, options);
    } catch (const RbacError& err) {
      if (err.code() != ErrorCode::NoPlan && err.code() != ErrorCode::DepthExceeded) {
        fail(r, "instance " + std::to_string(i) + ": " + std::string(to_string(err.code())));
      }
    }
    const auto expected =
        oracle::shortest_plan(oracle::State::from_snapshot(*e.store().snapshot()), {grant, user, goal, options});
    const std::string label = "instance " + std::to_string(i);
    if (plan.has_value() != expected.has_value()) {
      fail(r, label + ": planner " + (plan ? "found" : "missed") + " a plan");
      continue;
    }
    if (!plan) {
      ++none;
      continue;
    }
    ++found;
    ++lengths[plan->cost()];
    if (plan->cost() != expected->size()) fail(r, label + ": length differs from the oracle");
    std::vector<std::string> encoded;
    for (const auto& s : plan->steps) encoded.push_back(s.encode());
    same_plan += encoded == *expected;

    Engine replay = e.fork();
    if (!attempt([&] {
          for (const auto& s : plan->steps) admin::apply_action(replay, s);
        })) {
      fail(r, label + ": plan does not replay");
      continue;
    }
    for (const auto& p : goal) {
      if (replay.view().user_has_permission(user, p) != grant) fail(r, label + ": replayed plan misses the goal");
    }
  }
  std::string histogram;
  for (const auto& [length, count] : lengths) {
    histogram += (histogram.empty() ? "" : " ") + std::to_string(length) + ":" + std::to_string(count);
  }
  r.summary = "300 instances, " + std::to_string(found) + " plans by length {" + histogram + "}, " +
              std::to_string(same_plan) + " identical to the oracle's, " + std::to_string(none) + " without";
  return r;
}

// 7. Decompositions of sampled 4x4 targets against the exhaustive oracles.
Result optimizer_exactness() {
  Rng rng(1007);
  Result r;
  std::set<std::size_t> masks;
  while (masks.size() < 500) masks.insert(between(rng, 1, 0xFFFF));
  std::size_t flat_roles = 0, deep_cost = 0;
  for (const std::size_t mask : masks) {
    const auto target = matrix_from_mask(mask, 4, 4);
    const std::string label = "mask " + std::to_string(mask);
    const auto flat = admin::minimize_roles(target);
    const auto flat_best = oracle::min_flat_decomposition(target, 4);
    if (!flat_best || flat.roles.size() != flat_best->roles || flat.cost() != flat_best->edges) {
      fail(r, label + ": MinimizeRoles is not optimal");
    }
    if (admin::induced_relation(flat) != target) fail(r, label + ": MinimizeRoles over- or under-grants");
    flat_roles += flat.roles.size();

    try {
      const auto deep = admin::minimize_assignments(target, {.role_cap = 4});
      if (oracle::min_decomposition(target, 4) != deep.cost()) fail(r, label + ": hierarchy cost is not optimal");
      if (admin::induced_relation(deep) != target) fail(r, label + ": hierarchy decomposition over- or under-grants");
      deep_cost += deep.cost();
    } catch (const RbacError& err) {
      fail(r, label + ": " + std::string(to_string(err.code())));
    }
  }
  r.summary = "500 targets, " + std::to_string(flat_roles) + " roles total, hierarchy cost total " +
              std::to_string(deep_cost);
  return r;
}

// 8. Every golden script: expected output, audit replay, dump round trip,
// and the suite covers every verb and code.
Result golden_round_trips() {
  Result r;
  const auto scripts = golden_scripts(kGoldenDir);
  const fs::path scratch = fs::temp_directory_path() / "rbac-acceptance";
  std::set<std::string> verbs, codes;
  for (const auto& script : scripts) {
    const auto run = run_golden(script, scratch);
    const std::string stem = script.stem().string();
    fs::path expected = script;
    expected.replace_extension(".out");
    if (slurp(expected) != run.output) fail(r, stem + ": output differs");
    if (!run.audit_replays) fail(r, stem + ": audit replay diverges");
    if (!run.round_trips) fail(r, stem + ": dump/load/dump differs");
    if (!run.oracle_agrees) fail(r, stem + ": oracle cross-check differs");
    verbs.insert(run.verbs.begin(), run.verbs.end());
    codes.insert(run.codes.begin(), run.codes.end());
  }
  if (scripts.size() < 20) fail(r, "only " + std::to_string(scripts.size()) + " scripts");
  for (const auto& v : required_verbs()) {
    if (!verbs.contains(v)) fail(r, "no script uses " + v);
  }
  for (const auto& c : required_codes()) {
    if (!codes.contains(c)) fail(r, "no script produces " + c);
  }
  r.summary = std::to_string(scripts.size()) + " scripts, " + std::to_string(verbs.size()) + " verbs, " +
              std::to_string(codes.size()) + " error codes";
  return r;
}

std::string normalized(const cli::Command& c, const cli::Outcome& o) {
  static const std::regex version_line("^ok [0-9]+$", std::regex::multiline);
  return std::regex_replace(cli::render(c, o), version_line, "ok");
}

bool inherited_only(const PolicyView& view, const std::string& session, const Permission& p) {
  return view.check_access_hierarchical(session, p) && !view.check_access_core(session, p);
}

// 9. The layering pair differs only on hierarchy verbs and inherited access.
Result component_layering() {
  Result r;
  const auto core_cmds = cli::parse_script(slurp(kGoldenDir / "layering_core.rbac"));
  const auto full_cmds = cli::parse_script(slurp(kGoldenDir / "layering_full.rbac"));
  if (core_cmds.size() != full_cmds.size()) {
    fail(r, "scripts have different lengths");
    return r;
  }
  static const std::set<std::string> hierarchy_verbs{"AddInheritance", "DeleteInheritance", "AddAscendant",
                                                     "AddDescendant"};
  cli::Runner core, full;
  std::size_t rejected = 0, inherited = 0, core_probes = 0;
  for (std::size_t i = 0; i < core_cmds.size(); ++i) {
    const auto& cc = core_cmds[i];
    const auto& fc = full_cmds[i];
    const auto co = core.execute(cc);
    const auto fo = full.execute(fc);
    if (cc.verb == "PRAGMA" && fc.verb == "PRAGMA") continue;
    const std::string label = "line " + std::to_string(cc.line) + " " + cc.text;
    if (cc.text != fc.text) {
      fail(r, label + ": scripts diverge");
      continue;
    }
    const auto core_view = core.engine().view();
    const auto full_view = full.engine().view();
    if (cc.verb == "CheckAccess") {
      const auto p = Permission::parse(cc.args[1]);
      ++core_probes;
      if (core_view.check_access(cc.args[0], p) != core_view.check_access_core(cc.args[0], p)) {
        fail(r, label + ": core run used hierarchical semantics");
      }
    }
    if (hierarchy_verbs.contains(cc.verb)) {
      if (co.code != ErrorCode::UnknownRelation) fail(r, label + ": accepted with the hierarchy off");
      if (fo.status != cli::Outcome::Status::Ok) fail(r, label + ": rejected with the hierarchy on");
      ++rejected;
      continue;
    }
    if (normalized(cc, co) == normalized(fc, fo)) continue;
    // Any other difference must be access the full run gets only by inheritance.
    if (cc.verb == "CheckAccess") {
      if (!inherited_only(full_view, cc.args[0], Permission::parse(cc.args[1]))) fail(r, label + ": not inherited");
      ++inherited;
    } else if (cc.verb == "SessionPermissions") {
      const std::set<std::string> lost(co.items.begin(), co.items.end());
      for (const auto& item : fo.items) {
        if (!lost.contains(item) && !inherited_only(full_view, cc.args[0], Permission::parse(item))) {
          fail(r, label + ": " + item + " not inherited");
        }
      }
      for (const auto& item : co.items) {
        if (std::find(fo.items.begin(), fo.items.end(), item) == fo.items.end()) fail(r, label + ": lost " + item);
      }
      ++inherited;
    } else {
      fail(r, label + ": outputs differ");
    }
  }
  if (rejected == 0 || inherited == 0) fail(r, "the pair exercises no hierarchy difference");
  r.summary = std::to_string(rejected) + " hierarchy verbs rejected, " + std::to_string(inherited) +
              " inherited-only probes differ, " + std::to_string(core_probes) + " core CheckAccess probes";
  return r;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Result()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto wanted = [&](int id) { return only.empty() || only.contains(id); };

  FuzzStats fuzz;
  const std::vector<Criterion> criteria{
      {1, "closure equivalence", 30, closure_equivalence},
      {2, "naive/semi-naive equivalence", 30, naive_seminaive},
      {3, "CheckAccess oracle equivalence", 60, check_access_probes},
      {4, "constraint soundness fuzz", 300, [&] { return constraint_fuzz(fuzz); }},
      {5, "transactional atomicity", 300,
       [&] {
         // Checks the runs of criterion 4; timed by the replays alone.
         if (fuzz.runs == 0) constraint_fuzz(fuzz);
         return fuzz.atomicity;
       }},
      {6, "planner optimality", 300, planner_optimality},
      {7, "optimizer exactness", 600, optimizer_exactness},
      {8, "CLI round trip", 30, golden_round_trips},
      {9, "component layering", 30, component_layering},
  };

  bool all = true;
  for (const auto& c : criteria) {
    if (!wanted(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Result r = c.run();
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.id == 5) seconds = fuzz.replay_seconds;
    if (seconds > c.limit_seconds) fail(r, "over the time limit");
    all = all && r.ok;
    std::cout << (r.ok ? "PASS " : "FAIL ") << c.id << " " << c.name << ": " << r.summary << " [" << std::fixed
              << std::setprecision(2) << seconds << " s, limit " << std::setprecision(0) << c.limit_seconds << " s]"
              << (r.ok ? "" : "; first failure: " + r.failure) << "\n"
              << std::flush;
  }
  return all ? 0 : 1;
}
