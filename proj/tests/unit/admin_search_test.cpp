#include <doctest.h>

#include "generators.hpp"
#include "rbac/admin_search.hpp"
#include "rbac_oracle/oracle.hpp"

using namespace rbac;
using namespace rbac::admin;
using testing::error_of;

namespace {

const Permission p1{"o0", "d0"}, p2{"o0", "d1"};

std::vector<std::string> encodings(const AdminPlan& plan) {
  std::vector<std::string> out;
  for (const auto& s : plan.steps) out.push_back(s.encode());
  return out;
}

Engine base_state() {
  Engine e;
  testing::add_permissions(e, 1, 2);
  e.add_user("u");
  e.add_role("r1");
  e.add_role("r2");
  return e;
}

oracle::PlanQuery query(bool grant, const PermissionSet& perms, const PlanOptions& options) {
  return {grant, "u", perms, options};
}

}  // namespace

TEST_SUITE("admin-search") {
  TEST_CASE("one role covers a full block") {
    const AccessMatrix target{{"u1", p1}, {"u1", p2}, {"u2", p1}, {"u2", p2}};
    const auto d = minimize_roles(target);
    CHECK(d.roles.size() == 1);
    CHECK(d.ua.size() == 2);
    CHECK(d.pa.size() == 2);
    CHECK(induced_relation(d) == target);
    const auto best = oracle::min_flat_decomposition(target, 2);
    REQUIRE(best);
    CHECK(best->roles == 1);
    CHECK(best->edges == d.cost());
  }

  TEST_CASE("single pair") {
    const AccessMatrix target{{"u1", p1}};
    CHECK(minimize_roles(target).roles.size() == 1);
    const auto d = minimize_assignments(target);
    CHECK(d.cost() == 2);
    CHECK(d.rh.empty());
  }

  TEST_CASE("disjoint pairs need two roles") {
    const AccessMatrix target{{"u1", p1}, {"u2", p2}};
    const auto d = minimize_roles(target);
    CHECK(d.roles.size() == 2);
    CHECK(oracle::min_flat_decomposition(target, 2)->roles == 2);
    CHECK(induced_relation(d) == target);
  }

  TEST_CASE("nested rows use an inheritance edge") {
    const AccessMatrix target{{"u1", p1}, {"u2", p1}, {"u2", p2}};
    const auto d = minimize_assignments(target);
    CHECK(induced_relation(d) == target);
    CHECK(d.cost() == 5);
    CHECK(oracle::min_decomposition(target, 3) == 5u);
    const auto flat = minimize_roles(target);
    CHECK(flat.cost() >= d.cost());
  }

  TEST_CASE("fresh names avoid reserved roles") {
    CHECK(fresh_role_name({}) == "role_1");
    CHECK(fresh_role_name({"role_1", "role_3"}) == "role_2");
    const auto d = minimize_roles({{"u1", p1}}, {"role_1"});
    CHECK(d.roles == std::vector<std::string>{"role_2"});
  }

  TEST_CASE("empty target and too small a cap") {
    CHECK(error_of([] { minimize_roles({}); }) == ErrorCode::ParseError);
    const AccessMatrix target{{"u1", p1}, {"u2", p2}};
    CHECK(error_of([&] { minimize_assignments(target, {.role_cap = 1}); }) == ErrorCode::CapExceeded);
  }

  TEST_CASE("role objective prefers fewer roles") {
    // Three users with rows {p1}, {p2}, {p1,p2}: two roles with edges vs three.
    const AccessMatrix target{{"u1", p1}, {"u2", p2}, {"u3", p1}, {"u3", p2}};
    const auto by_roles = minimize_assignments(target, {.objective = Objective::Roles});
    CHECK(induced_relation(by_roles) == target);
    const auto best = oracle::min_roles_with_hierarchy(target, 4);
    REQUIRE(best);
    CHECK(by_roles.roles.size() == best->roles);
    CHECK(by_roles.cost() == best->edges);
  }

  TEST_CASE("random 4x4 targets match the exhaustive oracles") {
    testing::Rng rng(59);
    for (int round = 0; round < 40; ++round) {
      const auto target = testing::matrix_from_mask(testing::between(rng, 1, 0xFFFF), 4, 4);
      const auto flat = minimize_roles(target);
      const auto flat_best = oracle::min_flat_decomposition(target, 4);
      REQUIRE(flat_best);
      CHECK(flat.roles.size() == flat_best->roles);
      CHECK(flat.cost() == flat_best->edges);
      CHECK(induced_relation(flat) == target);
      const auto deep = minimize_assignments(target, {.role_cap = 4});
      CHECK(deep.cost() == oracle::min_decomposition(target, 4));
      CHECK(induced_relation(deep) == target);
    }
  }

  TEST_CASE("grant plan through an existing role") {
    Engine e = base_state();
    e.grant_permission(p1, "r1");
    const auto plan = shortest_grant_plan(e, "u", {p1});
    CHECK(encodings(plan) == std::vector<std::string>{"AssignUser u r1"});
    const auto expected = oracle::shortest_plan(oracle::State::from_snapshot(*e.store().snapshot()),
                                                query(true, {p1}, PlanOptions::grant_defaults()));
    CHECK(expected == encodings(plan));
  }

  TEST_CASE("a satisfied goal needs no steps") {
    Engine e = base_state();
    e.grant_permission(p1, "r1");
    e.assign_user("u", "r1");
    CHECK(shortest_grant_plan(e, "u", {p1}).cost() == 0);
    CHECK(shortest_revocation_plan(e, "u", {p2}).cost() == 0);
  }

  TEST_CASE("SSD blocks existing roles but not a fresh one") {
    Engine e = base_state();
    e.grant_permission(p1, "r2");
    e.assign_user("u", "r1");
    e.create_ssd_set("x", {"r1", "r2"}, 2);
    auto options = PlanOptions::grant_defaults();
    options.fresh_role_cap = 0;
    CHECK(error_of([&] { shortest_grant_plan(e, "u", {p1}, options); }) == ErrorCode::NoPlan);
    const auto state = oracle::State::from_snapshot(*e.store().snapshot());
    CHECK_FALSE(oracle::shortest_plan(state, query(true, {p1}, options)));
    options.fresh_role_cap = 2;
    const auto plan = shortest_grant_plan(e, "u", {p1}, options);
    CHECK(encodings(plan) ==
          std::vector<std::string>{"AddRole role_1", "AssignUser u role_1", "GrantPermission o0:d0 role_1"});
    CHECK(oracle::shortest_plan(state, query(true, {p1}, options)) == encodings(plan));
  }

  TEST_CASE("depth bound is reported separately") {
    Engine e = base_state();
    auto options = PlanOptions::grant_defaults();
    options.max_depth = 2;
    CHECK(error_of([&] { shortest_grant_plan(e, "u", {p1, p2}, options); }) == ErrorCode::DepthExceeded);
  }

  TEST_CASE("revocation cuts the only assignment") {
    Engine e = base_state();
    e.grant_permission(p1, "r1");
    e.assign_user("u", "r1");
    CHECK(encodings(shortest_revocation_plan(e, "u", {p1})) == std::vector<std::string>{"DeassignUser u r1"});
  }

  TEST_CASE("two paths need two cuts unless an edge is shared") {
    Engine e = base_state();
    e.grant_permission(p1, "r1");
    e.grant_permission(p1, "r2");
    e.assign_user("u", "r1");
    e.assign_user("u", "r2");
    CHECK(shortest_revocation_plan(e, "u", {p1}).cost() == 2);

    Engine shared = base_state();
    shared.add_role("r0");
    shared.grant_permission(p1, "r0");
    shared.add_inheritance("r1", "r0");
    shared.add_inheritance("r2", "r0");
    shared.assign_user("u", "r1");
    shared.assign_user("u", "r2");
    // Revoking p1 from r0 cuts both paths at once.
    const auto plan = shortest_revocation_plan(shared, "u", {p1});
    CHECK(plan.cost() == 1);
    const auto state = oracle::State::from_snapshot(*shared.store().snapshot());
    CHECK(oracle::shortest_plan(state, query(false, {p1}, PlanOptions::revocation_defaults())) == encodings(plan));
  }

  TEST_CASE("plans replay on the live engine") {
    testing::Rng rng(61);
    for (int round = 0; round < 20; ++round) {
      Engine e;
      const auto perms = testing::random_policy(e, rng, {.users = 3, .roles = 4, .ops = 1, .objs = 3, .sessions = 0});
      const PermissionSet goal{perms[testing::pick(rng, perms.size())]};
      const bool grant = testing::chance(rng, 0.5);
      auto options = grant ? PlanOptions::grant_defaults() : PlanOptions::revocation_defaults();
      options.max_depth = 3;
      options.fresh_role_cap = 1;
      std::optional<AdminPlan> plan;
      try {
        plan = grant ? shortest_grant_plan(e, "u0", goal, options) : shortest_revocation_plan(e, "u0", goal, options);
      } catch (const RbacError&) {
      }
      oracle::PlanQuery q{grant, "u0", goal, options};
      const auto expected = oracle::shortest_plan(oracle::State::from_snapshot(*e.store().snapshot()), q);
      REQUIRE(plan.has_value() == expected.has_value());
      if (!plan) continue;
      CHECK(plan->cost() == expected->size());
      Engine replay = e.fork();
      for (const auto& step : plan->steps) apply_action(replay, step);
      for (const auto& p : goal) CHECK(replay.view().user_has_permission("u0", p) == grant);
    }
  }
}
