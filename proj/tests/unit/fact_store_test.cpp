#include <doctest.h>

#include "generators.hpp"
#include "rbac/fact_store.hpp"
#include "rbac_oracle/oracle.hpp"

using namespace rbac;

namespace {

StateVersion commit_rows(FactStore& store, std::vector<Tuple> tuples) {
  auto txn = store.begin();
  for (const auto& t : tuples) txn.insert(t);
  return store.commit(txn);
}

}  // namespace

TEST_SUITE("fact-store") {
  TEST_CASE("versions start at zero and bump once per commit") {
    FactStore store;
    auto txn = store.begin();
    CHECK(txn.base_version() == 0);
    CHECK(store.commit(txn) == 1);
    auto next = store.begin();
    CHECK(next.base_version() == 1);
    store.rollback(next);
  }

  TEST_CASE("a second begin is rejected while one is open") {
    FactStore store;
    auto txn = store.begin();
    CHECK(testing::error_of([&] { store.begin(); }) == ErrorCode::NestedTransaction);
    store.rollback(txn);
    auto again = store.begin();
    CHECK(again.base_version() == 0);
    store.rollback(again);
  }

  TEST_CASE("a closed transaction cannot be used") {
    FactStore store;
    auto txn = store.begin();
    store.commit(txn);
    CHECK_FALSE(txn.is_open());
    CHECK(testing::error_of([&] { txn.insert({"user", {"alice"}}); }) == ErrorCode::NoTransaction);
  }

  TEST_CASE("inserts are visible inside the transaction only") {
    FactStore store;
    auto txn = store.begin();
    txn.insert({"user", {"alice"}});
    CHECK(txn.contains("user", {"alice"}));
    CHECK_FALSE(store.contains({"user", {"alice"}}));
    store.commit(txn);
    CHECK(store.contains({"user", {"alice"}}));
  }

  TEST_CASE("schema and reference checks on insert") {
    FactStore store;
    auto txn = store.begin();
    CHECK(testing::error_of([&] { txn.insert({"nosuch", {"a"}}); }) == ErrorCode::UnknownRelation);
    CHECK(testing::error_of([&] { txn.insert({"user", {"a", "b"}}); }) == ErrorCode::ArityMismatch);
    CHECK(testing::error_of([&] { txn.insert({"ua", {"alice", "r1"}}); }) == ErrorCode::DanglingReference);
    txn.insert({"user", {"alice"}});
    txn.insert({"role", {"r1"}});
    CHECK_NOTHROW(txn.insert({"ua", {"alice", "r1"}}));
    CHECK(testing::error_of([&] { txn.remove({"ua", {"alice"}}); }) == ErrorCode::ArityMismatch);
    store.rollback(txn);
  }

  TEST_CASE("deleting an absent tuple is a no-op") {
    FactStore store;
    commit_rows(store, {{"user", {"alice"}}});
    auto txn = store.begin();
    txn.remove({"user", {"bob"}});
    CHECK((txn.delta().empty() || txn.delta().begin()->second.deletes.empty()));
    store.commit(txn);
    CHECK(store.scan("user").size() == 1);
  }

  TEST_CASE("rollback leaves state and version unchanged") {
    FactStore store;
    commit_rows(store, {{"user", {"alice"}}, {"role", {"r1"}}});
    const std::string before = dump_snapshot(*store.snapshot());
    auto txn = store.begin();
    txn.insert({"ua", {"alice", "r1"}});
    txn.remove({"user", {"alice"}});
    store.rollback(txn);
    CHECK(store.version() == 1);
    CHECK(dump_snapshot(*store.snapshot()) == before);
  }

  TEST_CASE("a vetoing check applies nothing") {
    FactStore store;
    store.add_check({"no-bob", {"user"}, [](const Snapshot& post, const Delta&) -> std::optional<Violation> {
                       if (post.contains("user", {"bob"})) return Violation{"no-bob", {{"user", {"bob"}}}, "bob"};
                       return std::nullopt;
                     }});
    commit_rows(store, {{"user", {"alice"}}});
    auto txn = store.begin();
    txn.insert({"user", {"carol"}});
    txn.insert({"user", {"bob"}});
    try {
      store.commit(txn);
      FAIL("commit should be vetoed");
    } catch (const RbacError& e) {
      CHECK(e.code() == ErrorCode::ConstraintViolation);
      REQUIRE(e.violation());
      CHECK(e.violation()->constraint == "no-bob");
    }
    CHECK(store.version() == 1);
    CHECK_FALSE(store.in_transaction());
    CHECK(store.scan("user") == std::vector<Tuple>{{"user", {"alice"}}});
  }

  TEST_CASE("old versions stay readable and unchanged") {
    FactStore store;
    commit_rows(store, {{"user", {"alice"}}});
    commit_rows(store, {{"user", {"bob"}}});
    CHECK(store.scan("user", 1).size() == 1);
    CHECK(store.scan("user", 2).size() == 2);
    CHECK(store.scan("user", 1) == store.scan("user", 1));
    CHECK(store.scan("user", 0).empty());
  }

  TEST_CASE("scan order is lexicographic on fields") {
    FactStore store;
    commit_rows(store, {{"user", {"carol"}}, {"user", {"alice"}}, {"user", {"bob"}}});
    const auto users = store.scan("user");
    REQUIRE(users.size() == 3);
    CHECK(users[0].fields[0] == "alice");
    CHECK(users[2].fields[0] == "carol");
  }

  TEST_CASE("snapshot text round trip") {
    FactStore store;
    commit_rows(store, {{"user", {"alice"}}, {"role", {"r1"}}, {"ua", {"alice", "r1"}}, {"ssd", {"x", "2"}}});
    const std::string text = dump_snapshot(*store.snapshot());
    CHECK(text == "role(r1)\nssd(x,2)\nua(alice,r1)\nuser(alice)\n");
    FactStore other;
    auto txn = other.begin();
    load_tuples(txn, parse_snapshot_text("# comment\n\n" + text));
    other.commit(txn);
    CHECK(dump_snapshot(*other.snapshot()) == text);
  }

  TEST_CASE("snapshot text must end with a newline") {
    CHECK(testing::error_of([] { parse_snapshot_text("user(a)"); }) == ErrorCode::ParseError);
    CHECK(parse_snapshot_text("").empty());
  }

  TEST_CASE("committed state is the fold of accepted deltas") {
    testing::Rng rng(7);
    FactStore store;
    store.add_check({"pairs", {"ua"}, [](const Snapshot& post, const Delta&) -> std::optional<Violation> {
                       if (post.rows("ua").size() > 4) return Violation{"pairs", {}, ""};
                       return std::nullopt;
                     }});
    commit_rows(store, {{"user", {"u0"}}, {"user", {"u1"}}, {"role", {"r0"}}, {"role", {"r1"}}, {"role", {"r2"}}});
    for (int round = 0; round < 300; ++round) {
      auto txn = store.begin();
      const std::size_t ops = testing::between(rng, 1, 3);
      for (std::size_t k = 0; k < ops; ++k) {
        Tuple t{"ua", {testing::name('u', testing::pick(rng, 2)), testing::name('r', testing::pick(rng, 3))}};
        testing::chance(rng, 0.6) ? txn.insert(t) : txn.remove(t);
      }
      if (testing::chance(rng, 0.1)) {
        store.rollback(txn);
        continue;
      }
      testing::attempt([&] { store.commit(txn); });
      REQUIRE(store.snapshot()->rows("ua").size() <= 4);
    }
    CHECK(oracle::replay_deltas(store) == dump_snapshot(*store.snapshot()));
  }

  TEST_CASE("unchanged relations are shared between versions") {
    FactStore store;
    commit_rows(store, {{"user", {"alice"}}});
    commit_rows(store, {{"role", {"r1"}}});
    CHECK(&store.snapshot(1)->rows("user") == &store.snapshot(2)->rows("user"));
  }

  TEST_CASE("unretained versions are reported") {
    FactStore store;
    CHECK(testing::error_of([&] { store.snapshot(5); }) == ErrorCode::UnknownVersion);
  }
}
