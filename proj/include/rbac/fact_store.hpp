#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ranges>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rbac/error.hpp"
#include "rbac/schema.hpp"
#include "rbac/tuple.hpp"

namespace rbac {

using StateVersion = std::uint64_t;
using RowSet = std::set<Row>;
using RowRange = std::ranges::subrange<RowSet::const_iterator>;

// Derived data computed at commit time and frozen with the committed version.
class Attachment {
 public:
  virtual ~Attachment() = default;
};

struct RelationDelta {
  RowSet inserts;
  RowSet deletes;
};
using Delta = std::map<std::string, RelationDelta, std::less<>>;

/// True if the delta inserts or deletes anything in one of `relations`.
bool touches(const Delta& delta, const std::vector<std::string>& relations);

// An immutable committed state.
class Snapshot {
 public:
  StateVersion version() const { return version_; }
  const Schema& schema() const { return *schema_; }

  const RowSet& rows(std::string_view relation) const;
  bool contains(std::string_view relation, const Row& row) const;
  /// Rows whose leading fields equal `prefix`.
  RowRange with_prefix(std::string_view relation, const Row& prefix) const;
  bool entity_exists(EntityKind kind, std::string_view name) const;
  std::vector<Tuple> scan(std::string_view relation) const;

  template <class T>
  std::shared_ptr<const T> attachment(std::string_view name) const {
    auto it = attachments_.find(name);
    if (it == attachments_.end()) return nullptr;
    return std::dynamic_pointer_cast<const T>(it->second);
  }

 private:
  friend class FactStore;

  StateVersion version_ = 0;
  std::shared_ptr<const Schema> schema_;
  std::map<std::string, std::shared_ptr<const RowSet>, std::less<>> relations_;
  std::map<std::string, std::shared_ptr<const Attachment>, std::less<>> attachments_;
};

/// Snapshot text: one `relation(f1,f2)` line per tuple, sorted bytewise,
/// newline-terminated. The empty state dumps as the empty string.
std::string dump_snapshot(const Snapshot& snapshot);

/// Parses snapshot text. `#` lines and blank lines are skipped; a non-empty
/// input must end with a newline.
std::vector<Tuple> parse_snapshot_text(std::string_view text);

struct CommitCheck {
  std::string name;
  // Relations whose change triggers the check; empty means always.
  std::vector<std::string> triggers;
  std::function<std::optional<Violation>(const Snapshot& post, const Delta& delta)> check;
  ErrorCode code = ErrorCode::ConstraintViolation;
};

struct Maintainer {
  std::string name;
  std::vector<std::string> triggers;
  // `previous` is null for the initial state. May throw RbacError to veto.
  std::function<std::shared_ptr<const Attachment>(const Snapshot* previous, const Delta& delta,
                                                  const Snapshot& next)>
      update;
};

class FactStore;

class Transaction {
 public:
  Transaction(Transaction&& other) noexcept;
  Transaction& operator=(Transaction&&) = delete;
  Transaction(const Transaction&) = delete;
  ~Transaction();

  bool is_open() const { return store_ != nullptr; }
  StateVersion base_version() const { return base_->version(); }
  const Snapshot& base() const { return *base_; }
  const Delta& delta() const { return delta_; }

  /// Adds a tuple. Checks relation, arity, and that every referenced entity
  /// exists in this transaction's view.
  void insert(const Tuple& tuple);
  void insert(std::string_view relation, Row row);
  /// Removes a tuple; removing an absent tuple is a no-op.
  void remove(const Tuple& tuple);
  void remove(std::string_view relation, const Row& row);

  bool contains(std::string_view relation, const Row& row) const;
  std::vector<Row> rows(std::string_view relation) const;
  std::vector<Row> with_prefix(std::string_view relation, const Row& prefix) const;
  bool entity_exists(EntityKind kind, std::string_view name) const;

 private:
  friend class FactStore;
  Transaction(FactStore* store, std::shared_ptr<const Snapshot> base);

  const RelationSchema& schema_for(std::string_view relation) const;
  void require_open() const;

  FactStore* store_;
  std::shared_ptr<const Snapshot> base_;
  Delta delta_;
};

// Versioned in-memory relational store with a single open transaction at a
// time. Committed snapshots are immutable and share unchanged relations.
class FactStore {
 public:
  explicit FactStore(std::shared_ptr<const Schema> schema = Schema::rbac());
  FactStore(const FactStore& other);
  FactStore& operator=(const FactStore& other);
  FactStore(FactStore&&) noexcept;
  FactStore& operator=(FactStore&&) noexcept;
  ~FactStore();

  Transaction begin();
  /// Builds the post-state, runs maintainers and triggered checks, and
  /// publishes it. On any failure nothing is applied, the transaction is
  /// closed, and the error propagates.
  StateVersion commit(Transaction& txn);
  void rollback(Transaction& txn);

  StateVersion version() const { return history_.back()->version(); }
  StateVersion oldest_version() const { return history_.front()->version(); }
  std::shared_ptr<const Snapshot> snapshot() const { return history_.back(); }
  std::shared_ptr<const Snapshot> snapshot(StateVersion version) const;
  std::vector<Tuple> scan(std::string_view relation, std::optional<StateVersion> version = {}) const;
  bool contains(const Tuple& tuple) const;
  const Schema& schema() const { return *schema_; }
  bool in_transaction() const { return open_; }

  /// The delta that produced `version` from `version - 1`.
  const Delta& delta(StateVersion version) const;

  void add_check(CommitCheck check);
  void add_maintainer(Maintainer maintainer);
  void set_checks_enabled(bool enabled) { checks_enabled_ = enabled; }

  /// Copy that keeps only the latest snapshot as history.
  FactStore fork() const;

 private:
  friend class Transaction;

  std::shared_ptr<const Schema> schema_;
  std::vector<std::shared_ptr<const Snapshot>> history_;
  std::vector<Delta> deltas_;  // deltas_[i] produced history_[i + 1]
  std::vector<CommitCheck> checks_;
  std::vector<Maintainer> maintainers_;
  bool checks_enabled_ = true;
  bool open_ = false;
};

/// Replaces the whole state visible in `txn` with `tuples`, inserting
/// entity-defining relations before the relations that reference them.
void load_tuples(Transaction& txn, const std::vector<Tuple>& tuples);

}  // namespace rbac
