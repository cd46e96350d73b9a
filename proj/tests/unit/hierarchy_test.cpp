#include <doctest.h>

#include "generators.hpp"
#include "rbac/engine.hpp"
#include "rbac/rule_engine.hpp"
#include "rbac_oracle/oracle.hpp"

using namespace rbac;
using testing::error_of;

namespace {

std::set<oracle::Pair> maintained(const Engine& e) {
  const auto pairs = e.view().closure().pairs();
  return {pairs.begin(), pairs.end()};
}

std::set<oracle::Pair> from_oracle(const Engine& e) {
  const auto s = oracle::State::from_snapshot(*e.store().snapshot());
  return oracle::closure(s.roles, s.rh);
}

}  // namespace

TEST_SUITE("rbac-hierarchy") {
  TEST_CASE("a chain closes transitively") {
    Engine e;
    for (const char* r : {"a", "b", "c"}) e.add_role(r);
    e.add_inheritance("a", "b");
    e.add_inheritance("b", "c");
    const auto geq = maintained(e);
    for (const oracle::Pair& p : {oracle::Pair{"a", "b"}, {"b", "c"}, {"a", "c"}, {"a", "a"}, {"b", "b"}, {"c", "c"}}) {
      CHECK(geq.contains(p));
    }
    CHECK(geq.size() == 6);
  }

  TEST_CASE("a closing edge is rejected with the path") {
    Engine e;
    for (const char* r : {"a", "b", "c"}) e.add_role(r);
    e.add_inheritance("a", "b");
    e.add_inheritance("b", "c");
    const std::string before = e.dump();
    try {
      e.add_inheritance("c", "a");
      FAIL("cycle accepted");
    } catch (const RbacError& err) {
      CHECK(err.code() == ErrorCode::CycleDetected);
      REQUIRE(err.violation());
      CHECK(err.violation()->witness.size() == 3);
    }
    CHECK(e.dump() == before);
    CHECK(error_of([&] { e.add_inheritance("a", "a"); }) == ErrorCode::CycleDetected);
    CHECK(error_of([&] { e.add_inheritance("a", "b"); }) == ErrorCode::DuplicateEdge);
    CHECK(error_of([&] { e.delete_inheritance("a", "c"); }) == ErrorCode::MissingEdge);
  }

  TEST_CASE("AddAscendant and AddDescendant create the new role") {
    Engine e;
    e.add_role("mid");
    e.add_ascendant("top", "mid");
    e.add_descendant("mid", "low");
    CHECK(e.view().closure().geq("top", "low"));
    CHECK(error_of([&] { e.add_ascendant("mid", "low"); }) == ErrorCode::DuplicateEntity);
  }

  TEST_CASE("authorized permissions follow juniors") {
    Engine e;
    e.add_operation("p");
    e.add_object("o");
    e.add_role("a");
    e.add_role("b");
    e.grant_permission({"p", "o"}, "b");
    CHECK(e.authorized_permissions("a").empty());
    CHECK(e.authorized_permissions("b") == e.role_permissions("b"));
    e.add_inheritance("a", "b");
    CHECK(e.authorized_permissions("a") == PermissionSet{{"p", "o"}});
    e.add_user("u");
    e.assign_user("u", "a");
    CHECK(e.authorized_roles("u") == NameSet{"a", "b"});
    CHECK(e.authorized_users("b") == NameSet{"u"});
    e.create_session("u", "s", {"b"});
    CHECK(e.check_access("s", {"p", "o"}));
  }

  TEST_CASE("removing an edge drops activations it justified") {
    Engine e;
    e.add_role("a");
    e.add_role("b");
    e.add_user("u");
    e.assign_user("u", "a");
    e.add_inheritance("a", "b");
    e.create_session("u", "s", {"a", "b"});
    e.delete_inheritance("a", "b");
    CHECK(e.session_roles("s") == NameSet{"a"});
  }

  TEST_CASE("hierarchical verbs are unavailable with the component off") {
    Engine e;
    e.add_role("a");
    e.add_role("b");
    e.set_components({false, true, true});
    CHECK(error_of([&] { e.add_inheritance("a", "b"); }) == ErrorCode::UnknownRelation);
    CHECK(error_of([&] { e.add_ascendant("c", "a"); }) == ErrorCode::UnknownRelation);
  }

  TEST_CASE("turning the hierarchy off requires an empty rh") {
    Engine e;
    e.add_role("a");
    e.add_role("b");
    e.add_inheritance("a", "b");
    CHECK(error_of([&] { e.set_components({false, true, true}); }) == ErrorCode::ConstraintViolation);
  }

  TEST_CASE("maintained closure matches Floyd-Warshall under inserts and deletes") {
    testing::Rng rng(17);
    for (int round = 0; round < 10; ++round) {
      Engine e;
      for (std::size_t i = 0; i < 20; ++i) e.add_role(testing::name('r', i));
      for (int step = 0; step < 60; ++step) {
        const auto a = testing::name('r', testing::pick(rng, 20));
        const auto b = testing::name('r', testing::pick(rng, 20));
        if (testing::chance(rng, 0.8)) {
          testing::attempt([&] { e.add_inheritance(a, b); });
        } else {
          testing::attempt([&] { e.delete_inheritance(a, b); });
        }
        REQUIRE(maintained(e) == from_oracle(e));
      }
      if (testing::chance(rng, 0.5)) {
        e.delete_role(testing::name('r', testing::pick(rng, 20)));
        CHECK(maintained(e) == from_oracle(e));
      }
    }
  }

  TEST_CASE("200 random DAG insertions close like the oracle") {
    testing::Rng rng(23);
    Engine e;
    for (std::size_t i = 0; i < 40; ++i) e.add_role(testing::name('r', i));
    for (const auto& [a, b] : testing::random_dag(rng, 40, 200)) e.add_inheritance(a, b);
    CHECK(maintained(e) == from_oracle(e));
    CHECK(e.store().snapshot()->rows("rh").size() == 200);
  }

  TEST_CASE("authorized permissions equal the union over juniors") {
    testing::Rng rng(29);
    for (int round = 0; round < 10; ++round) {
      Engine e;
      testing::random_policy(e, rng, {.users = 3, .roles = 30, .sessions = 0});
      const auto view = e.view();
      for (const auto& r : view.roles()) {
        PermissionSet expected;
        for (const auto& j : view.closure().juniors(r)) {
          for (const auto& p : view.role_permissions(j)) expected.insert(p);
        }
        CHECK(view.authorized_permissions(r) == expected);
      }
    }
  }

  TEST_CASE("CheckAccess agrees with the oracle on random hierarchical states") {
    testing::Rng rng(31);
    for (int round = 0; round < 40; ++round) {
      Engine e;
      const auto perms = testing::random_policy(e, rng, {});
      const auto state = oracle::State::from_snapshot(*e.store().snapshot());
      for (const auto& s : e.view().sessions()) {
        for (const auto& p : perms) CHECK(e.check_access(s, p) == oracle::check_access(state, s, p, true));
      }
    }
  }

  TEST_CASE("rule-engine geq matches the maintained closure") {
    testing::Rng rng(37);
    const auto program = rules::builtin_library();
    for (int round = 0; round < 5; ++round) {
      Engine e;
      for (std::size_t i = 0; i < 30; ++i) e.add_role(testing::name('r', i));
      for (const auto& [a, b] : testing::random_dag(rng, 30, 60)) e.add_inheritance(a, b);
      const auto db = rules::evaluate_seminaive(program, e.store(), e.version());
      std::set<oracle::Pair> geq;
      for (const auto& row : db.at("geq")) geq.emplace(row[0], row[1]);
      CHECK(geq == maintained(e));
    }
  }
}
