#include <doctest.h>

#include "generators.hpp"
#include "rbac/engine.hpp"
#include "rbac_oracle/oracle.hpp"

using namespace rbac;
using testing::error_of;

namespace {

const Permission kRead{"read", "repo"};

Engine alice_engineer() {
  Engine e;
  e.add_user("alice");
  e.add_role("eng");
  e.add_operation("read");
  e.add_object("repo");
  e.assign_user("alice", "eng");
  e.grant_permission(kRead, "eng");
  return e;
}

}  // namespace

TEST_SUITE("rbac-core") {
  TEST_CASE("duplicate entities are rejected without a new version") {
    Engine e;
    CHECK(e.add_user("alice") == 1);
    CHECK(error_of([&] { e.add_user("alice"); }) == ErrorCode::DuplicateEntity);
    CHECK(e.version() == 1);
    CHECK(error_of([&] { e.delete_user("bob"); }) == ErrorCode::UnknownEntity);
    CHECK(error_of([&] { e.add_user("a,b"); }) == ErrorCode::InvalidName);
  }

  TEST_CASE("CheckAccess follows the direct assignment") {
    Engine e = alice_engineer();
    e.create_session("alice", "s", {"eng"});
    const auto v = e.version();
    CHECK(e.check_access("s", kRead));
    CHECK(e.version() == v);
    CHECK(error_of([&] { e.check_access("nosuch", kRead); }) == ErrorCode::UnknownSession);
    CHECK(error_of([&] { e.check_access("s", {"write", "repo"}); }) == ErrorCode::UnknownEntity);
  }

  TEST_CASE("a fresh store knows no sessions") {
    Engine e;
    CHECK(error_of([&] { e.check_access("s", kRead); }) == ErrorCode::UnknownSession);
  }

  TEST_CASE("assignment preconditions") {
    Engine e = alice_engineer();
    CHECK(error_of([&] { e.assign_user("alice", "eng"); }) == ErrorCode::DuplicateAssignment);
    CHECK(error_of([&] { e.deassign_user("alice", "ops"); }) == ErrorCode::UnknownEntity);
    e.add_role("ops");
    CHECK(error_of([&] { e.deassign_user("alice", "ops"); }) == ErrorCode::MissingAssignment);
    CHECK(error_of([&] { e.grant_permission(kRead, "eng"); }) == ErrorCode::DuplicateAssignment);
    CHECK(error_of([&] { e.revoke_permission(kRead, "ops"); }) == ErrorCode::MissingAssignment);
    CHECK(error_of([&] { e.grant_permission({"write", "repo"}, "eng"); }) == ErrorCode::UnknownEntity);
  }

  TEST_CASE("session activation needs an assignment and the owner") {
    Engine e = alice_engineer();
    e.add_user("bob");
    e.add_role("ops");
    e.create_session("alice", "s", {});
    CHECK(error_of([&] { e.add_active_role("alice", "s", "ops"); }) == ErrorCode::NotAuthorized);
    CHECK(error_of([&] { e.add_active_role("bob", "s", "eng"); }) == ErrorCode::SessionOwnerMismatch);
    CHECK(error_of([&] { e.create_session("bob", "t", {"eng"}); }) == ErrorCode::NotAuthorized);
    CHECK(error_of([&] { e.create_session("bob", "s", {}); }) == ErrorCode::DuplicateEntity);
    CHECK(e.view().sessions() == NameSet{"s"});
    e.add_active_role("alice", "s", "eng");
    CHECK(e.session_roles("s") == NameSet{"eng"});
    e.drop_active_role("alice", "s", "eng");
    CHECK(e.session_roles("s").empty());
    CHECK(error_of([&] { e.drop_active_role("alice", "s", "eng"); }) == ErrorCode::MissingAssignment);
    e.delete_session("alice", "s");
    CHECK(e.view().sessions().empty());
  }

  TEST_CASE("DeleteRole keeps sessions and drops the role from them") {
    Engine e = alice_engineer();
    e.add_role("ops");
    e.assign_user("alice", "ops");
    e.create_session("alice", "s", {"eng", "ops"});
    e.delete_role("eng");
    CHECK(e.view().sessions() == NameSet{"s"});
    CHECK(e.session_roles("s") == NameSet{"ops"});
    // No tuple mentions the deleted role.
    CHECK(e.dump().find("eng") == std::string::npos);
  }

  TEST_CASE("DeleteUser removes assignments and sessions in one version") {
    Engine e;
    e.add_user("u");
    for (const char* r : {"r1", "r2", "r3"}) {
      e.add_role(r);
      e.assign_user("u", r);
    }
    e.create_session("u", "s1", {"r1"});
    e.create_session("u", "s2", {"r2", "r3"});
    const auto v = e.version();
    e.delete_user("u");
    CHECK(e.version() == v + 1);
    const auto after = oracle::State::from_snapshot(*e.store().snapshot());
    CHECK(after.ua.empty());
    CHECK(after.session_user.empty());
    CHECK(after.session_role.empty());
    CHECK(oracle::replay_deltas(e.store()) == e.dump());
  }

  TEST_CASE("DeassignUser deactivates the role in live sessions") {
    Engine e = alice_engineer();
    e.create_session("alice", "s", {"eng"});
    e.deassign_user("alice", "eng");
    CHECK(e.session_roles("s").empty());
    CHECK_FALSE(e.check_access("s", kRead));
  }

  TEST_CASE("review functions") {
    Engine e = alice_engineer();
    e.add_user("bob");
    e.add_role("ops");
    e.add_operation("write");
    e.grant_permission({"write", "repo"}, "ops");
    e.assign_user("bob", "ops");
    e.assign_user("bob", "eng");
    e.create_session("bob", "s", {"ops"});
    CHECK(e.assigned_users("eng") == NameSet{"alice", "bob"});
    CHECK(e.assigned_roles("bob") == NameSet{"eng", "ops"});
    CHECK(e.role_permissions("ops") == PermissionSet{{"write", "repo"}});
    CHECK(e.user_permissions("bob") == PermissionSet{kRead, {"write", "repo"}});
    CHECK(e.session_permissions("s") == PermissionSet{{"write", "repo"}});
  }

  TEST_CASE("counts include zero rows") {
    Engine e;
    e.add_role("r1");
    CHECK(e.count_users_per_role() == std::map<std::string, std::size_t>{{"r1", 0}});
    e.add_user("u1");
    e.add_user("u2");
    e.assign_user("u1", "r1");
    e.assign_user("u2", "r1");
    CHECK(e.count_users_per_role() == std::map<std::string, std::size_t>{{"r1", 2}});
    CHECK(e.count_roles_per_user() == std::map<std::string, std::size_t>{{"u1", 1}, {"u2", 1}});
  }

  TEST_CASE("counts agree with a tally of ua") {
    testing::Rng rng(11);
    Engine e;
    for (std::size_t i = 0; i < 12; ++i) e.add_user(testing::name('u', i));
    for (std::size_t i = 0; i < 9; ++i) e.add_role(testing::name('r', i));
    while (e.store().snapshot()->rows("ua").size() < 50) {
      testing::attempt([&] { e.assign_user(testing::name('u', testing::pick(rng, 12)), testing::name('r', testing::pick(rng, 9))); });
    }
    std::map<std::string, std::size_t> per_role, per_user;
    for (const auto& t : e.store().scan("ua")) {
      ++per_user[t.fields[0]];
      ++per_role[t.fields[1]];
    }
    for (const auto& [role, n] : e.count_users_per_role()) CHECK(n == per_role[role]);
    for (const auto& [user, n] : e.count_roles_per_user()) CHECK(n == per_user[user]);
  }

  TEST_CASE("user permissions are the union over assigned roles") {
    testing::Rng rng(3);
    for (int round = 0; round < 30; ++round) {
      Engine e;
      testing::random_policy(e, rng, {.hierarchy = false});
      const auto view = e.view();
      for (const auto& u : view.users()) {
        PermissionSet expected;
        for (const auto& r : view.assigned_roles(u)) {
          for (const auto& p : view.role_permissions(r)) expected.insert(p);
        }
        CHECK(view.user_permissions(u) == expected);
      }
    }
  }

  TEST_CASE("CheckAccess agrees with the oracle on random core states") {
    testing::Rng rng(5);
    for (int round = 0; round < 40; ++round) {
      Engine e;
      const auto perms = testing::random_policy(e, rng, {.hierarchy = false});
      const auto state = oracle::State::from_snapshot(*e.store().snapshot());
      for (const auto& s : e.view().sessions()) {
        for (const auto& p : perms) CHECK(e.check_access(s, p) == oracle::check_access(state, s, p, false));
      }
    }
  }

  TEST_CASE("failed commands leave the state untouched") {
    Engine e = alice_engineer();
    const std::string before = e.dump();
    const auto v = e.version();
    CHECK(error_of([&] { e.create_session("alice", "s", {"eng", "nosuch"}); }));
    CHECK(e.dump() == before);
    CHECK(e.version() == v);
  }
}
