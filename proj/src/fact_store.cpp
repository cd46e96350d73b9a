#include "rbac/fact_store.hpp"

#include <algorithm>

namespace rbac {
namespace {

const RowSet& empty_rows() {
  static const RowSet empty;
  return empty;
}

bool has_prefix(const Row& row, const Row& prefix) {
  if (row.size() < prefix.size()) return false;
  return std::equal(prefix.begin(), prefix.end(), row.begin());
}

RowRange prefix_range(const RowSet& rows, const Row& prefix) {
  auto first = rows.lower_bound(prefix);
  auto last = first;
  while (last != rows.end() && has_prefix(*last, prefix)) ++last;
  return {first, last};
}

}  // namespace

bool touches(const Delta& delta, const std::vector<std::string>& relations) {
  if (relations.empty()) return true;
  for (const auto& name : relations) {
    auto it = delta.find(name);
    if (it != delta.end() && (!it->second.inserts.empty() || !it->second.deletes.empty())) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Snapshot

const RowSet& Snapshot::rows(std::string_view relation) const {
  auto it = relations_.find(relation);
  if (it == relations_.end()) {
    if (schema_->find(relation) == nullptr) {
      throw RbacError(ErrorCode::UnknownRelation, std::string(relation));
    }
    return empty_rows();
  }
  return *it->second;
}

bool Snapshot::contains(std::string_view relation, const Row& row) const {
  return rows(relation).count(row) > 0;
}

RowRange Snapshot::with_prefix(std::string_view relation, const Row& prefix) const {
  return prefix_range(rows(relation), prefix);
}

bool Snapshot::entity_exists(EntityKind kind, std::string_view name) const {
  Row key{std::string(name)};
  for (const auto* def : schema_->definers(kind)) {
    if (!with_prefix(def->name, key).empty()) return true;
  }
  return false;
}

std::vector<Tuple> Snapshot::scan(std::string_view relation) const {
  std::vector<Tuple> out;
  for (const auto& row : rows(relation)) out.push_back({std::string(relation), row});
  return out;
}

std::string dump_snapshot(const Snapshot& snapshot) {
  std::vector<std::string> lines;
  for (const auto& relation : snapshot.schema().relations()) {
    for (const auto& row : snapshot.rows(relation.name)) lines.push_back(format_tuple(relation.name, row));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

std::vector<Tuple> parse_snapshot_text(std::string_view text) {
  std::vector<Tuple> out;
  if (text.empty()) return out;
  if (text.back() != '\n') throw RbacError(ErrorCode::ParseError, "snapshot must end with a newline");
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    try {
      out.push_back(parse_tuple(line));
    } catch (const RbacError& e) {
      throw RbacError(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transaction

Transaction::Transaction(FactStore* store, std::shared_ptr<const Snapshot> base)
    : store_(store), base_(std::move(base)) {}

Transaction::Transaction(Transaction&& other) noexcept
    : store_(other.store_), base_(std::move(other.base_)), delta_(std::move(other.delta_)) {
  other.store_ = nullptr;
}

Transaction::~Transaction() {
  if (store_ != nullptr) store_->rollback(*this);
}

void Transaction::require_open() const {
  if (store_ == nullptr) throw RbacError(ErrorCode::NoTransaction, "transaction is closed");
}

const RelationSchema& Transaction::schema_for(std::string_view relation) const {
  const auto* schema = base_->schema().find(relation);
  if (schema == nullptr) throw RbacError(ErrorCode::UnknownRelation, std::string(relation));
  return *schema;
}

void Transaction::insert(const Tuple& tuple) { insert(tuple.relation, tuple.fields); }

void Transaction::insert(std::string_view relation, Row row) {
  require_open();
  const auto& schema = schema_for(relation);
  if (row.size() != schema.fields.size()) {
    throw RbacError(ErrorCode::ArityMismatch, format_tuple(relation, row) + " expects " +
                                                  std::to_string(schema.fields.size()) + " fields");
  }
  if (contains(relation, row)) return;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const FieldKind field = schema.fields[i];
    const std::string& value = row[i];
    if (field == FieldKind::Natural) {
      if (!is_natural(value)) throw RbacError(ErrorCode::InvalidName, "'" + value + "' is not a natural number");
      continue;
    }
    if (!is_valid_name(value)) throw RbacError(ErrorCode::InvalidName, "'" + value + "' is not a valid name");
    auto kind = referenced_kind(field);
    if (!kind) continue;
    if (i == 0 && schema.defines == kind) {
      if (entity_exists(*kind, value)) {
        throw RbacError(ErrorCode::DuplicateEntity,
                        std::string(to_string(*kind)) + " " + value + " already exists");
      }
    } else if (!entity_exists(*kind, value)) {
      throw RbacError(ErrorCode::DanglingReference,
                      format_tuple(relation, row) + " references unknown " + std::string(to_string(*kind)) + " " +
                          value);
    }
  }
  auto& rd = delta_[std::string(relation)];
  if (rd.deletes.erase(row) == 0) rd.inserts.insert(std::move(row));
}

void Transaction::remove(const Tuple& tuple) { remove(tuple.relation, tuple.fields); }

void Transaction::remove(std::string_view relation, const Row& row) {
  require_open();
  const auto& schema = schema_for(relation);
  if (row.size() != schema.fields.size()) {
    throw RbacError(ErrorCode::ArityMismatch, format_tuple(relation, row) + " expects " +
                                                  std::to_string(schema.fields.size()) + " fields");
  }
  auto& rd = delta_[std::string(relation)];
  if (rd.inserts.erase(row) > 0) return;
  if (base_->contains(relation, row)) rd.deletes.insert(row);
}

bool Transaction::contains(std::string_view relation, const Row& row) const {
  auto it = delta_.find(relation);
  if (it != delta_.end()) {
    if (it->second.inserts.count(row)) return true;
    if (it->second.deletes.count(row)) return false;
  }
  return base_->contains(relation, row);
}

std::vector<Row> Transaction::with_prefix(std::string_view relation, const Row& prefix) const {
  std::vector<Row> out;
  auto it = delta_.find(relation);
  const RelationDelta* rd = it == delta_.end() ? nullptr : &it->second;
  for (const auto& row : base_->with_prefix(relation, prefix)) {
    if (rd == nullptr || rd->deletes.count(row) == 0) out.push_back(row);
  }
  if (rd != nullptr) {
    for (const auto& row : prefix_range(rd->inserts, prefix)) out.push_back(row);
    std::sort(out.begin(), out.end());
  }
  return out;
}

std::vector<Row> Transaction::rows(std::string_view relation) const { return with_prefix(relation, {}); }

bool Transaction::entity_exists(EntityKind kind, std::string_view name) const {
  Row key{std::string(name)};
  for (const auto* def : base_->schema().definers(kind)) {
    if (!with_prefix(def->name, key).empty()) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// FactStore

FactStore::FactStore(std::shared_ptr<const Schema> schema) : schema_(std::move(schema)) {
  auto initial = std::make_shared<Snapshot>();
  initial->schema_ = schema_;
  history_.push_back(std::move(initial));
}

FactStore::FactStore(const FactStore& other)
    : schema_(other.schema_),
      history_(other.history_),
      deltas_(other.deltas_),
      checks_(other.checks_),
      maintainers_(other.maintainers_),
      checks_enabled_(other.checks_enabled_) {}

FactStore& FactStore::operator=(const FactStore& other) {
  if (this != &other) {
    FactStore copy(other);
    *this = std::move(copy);
  }
  return *this;
}

FactStore::FactStore(FactStore&&) noexcept = default;
FactStore& FactStore::operator=(FactStore&&) noexcept = default;
FactStore::~FactStore() = default;

FactStore FactStore::fork() const {
  FactStore copy(schema_);
  copy.history_ = {history_.back()};
  copy.checks_ = checks_;
  copy.maintainers_ = maintainers_;
  copy.checks_enabled_ = checks_enabled_;
  return copy;
}

Transaction FactStore::begin() {
  if (open_) throw RbacError(ErrorCode::NestedTransaction, "a transaction is already open");
  open_ = true;
  return Transaction(this, history_.back());
}

void FactStore::rollback(Transaction& txn) {
  if (txn.store_ != this) throw RbacError(ErrorCode::NoTransaction, "transaction is not open on this store");
  txn.store_ = nullptr;
  txn.delta_.clear();
  open_ = false;
}

StateVersion FactStore::commit(Transaction& txn) {
  if (txn.store_ != this) throw RbacError(ErrorCode::NoTransaction, "transaction is not open on this store");
  // The transaction is finished whatever the outcome.
  Delta delta = std::move(txn.delta_);
  txn.store_ = nullptr;
  open_ = false;
  for (auto it = delta.begin(); it != delta.end();) {
    if (it->second.inserts.empty() && it->second.deletes.empty()) {
      it = delta.erase(it);
    } else {
      ++it;
    }
  }

  const Snapshot& prev = *history_.back();
  auto next = std::make_shared<Snapshot>();
  next->schema_ = schema_;
  next->version_ = prev.version_ + 1;
  next->relations_ = prev.relations_;
  for (const auto& [name, rd] : delta) {
    auto rows = std::make_shared<RowSet>(prev.rows(name));
    for (const auto& row : rd.deletes) rows->erase(row);
    for (const auto& row : rd.inserts) rows->insert(row);
    next->relations_[name] = std::move(rows);
  }

  // Entities whose last defining tuple went away must leave no references.
  std::vector<std::pair<EntityKind, std::string>> removed;
  for (const auto& [name, rd] : delta) {
    const auto* schema = schema_->find(name);
    if (!schema->defines) continue;
    for (const auto& row : rd.deletes) {
      if (!next->entity_exists(*schema->defines, row[0])) removed.emplace_back(*schema->defines, row[0]);
    }
  }
  if (!removed.empty()) {
    Violation violation{"referential", {}, {}, {}, 0};
    for (const auto& relation : schema_->relations()) {
      for (const auto& row : next->rows(relation.name)) {
        for (std::size_t i = 0; i < row.size(); ++i) {
          auto kind = referenced_kind(relation.fields[i]);
          if (!kind || (i == 0 && relation.defines == kind)) continue;
          for (const auto& [rk, rname] : removed) {
            if (rk == *kind && rname == row[i]) violation.witness.push_back({relation.name, row});
          }
        }
      }
    }
    if (!violation.witness.empty()) {
      throw RbacError(ErrorCode::DanglingReference,
                      format_tuple(violation.witness.front()) + " references a deleted entity", violation);
    }
  }

  for (const auto& m : maintainers_) {
    auto previous = prev.attachments_.find(m.name);
    if (previous != prev.attachments_.end() && !touches(delta, m.triggers)) {
      next->attachments_[m.name] = previous->second;
    } else {
      next->attachments_[m.name] = m.update(&prev, delta, *next);
    }
  }

  if (checks_enabled_) {
    for (const auto& c : checks_) {
      if (!touches(delta, c.triggers)) continue;
      if (auto violation = c.check(*next, delta)) {
        std::string detail = violation->constraint + " violated";
        if (!violation->subject.empty()) detail += " by " + violation->subject;
        throw RbacError(c.code, detail, std::move(*violation));
      }
    }
  }

  history_.push_back(std::move(next));
  deltas_.push_back(std::move(delta));
  return history_.back()->version();
}

std::shared_ptr<const Snapshot> FactStore::snapshot(StateVersion version) const {
  StateVersion oldest = oldest_version();
  if (version < oldest || version > this->version()) {
    throw RbacError(ErrorCode::UnknownVersion, "version " + std::to_string(version) + " is not retained");
  }
  return history_[version - oldest];
}

std::vector<Tuple> FactStore::scan(std::string_view relation, std::optional<StateVersion> version) const {
  return (version ? snapshot(*version) : snapshot())->scan(relation);
}

bool FactStore::contains(const Tuple& tuple) const { return snapshot()->contains(tuple.relation, tuple.fields); }

const Delta& FactStore::delta(StateVersion version) const {
  StateVersion oldest = oldest_version();
  if (version <= oldest || version > this->version()) {
    throw RbacError(ErrorCode::UnknownVersion, "no delta retained for version " + std::to_string(version));
  }
  return deltas_[version - oldest - 1];
}

void FactStore::add_check(CommitCheck check) { checks_.push_back(std::move(check)); }

void FactStore::add_maintainer(Maintainer maintainer) {
  // Attach to the current head; registration happens during setup, before
  // any reader holds the head snapshot.
  auto head = std::make_shared<Snapshot>(*history_.back());
  head->attachments_[maintainer.name] = maintainer.update(nullptr, Delta{}, *head);
  history_.back() = std::move(head);
  maintainers_.push_back(std::move(maintainer));
}

void load_tuples(Transaction& txn, const std::vector<Tuple>& tuples) {
  const Schema& schema = txn.base().schema();
  for (const auto& relation : schema.relations()) {
    for (const auto& row : txn.rows(relation.name)) txn.remove(relation.name, row);
  }
  std::vector<const Tuple*> ordered;
  for (const auto& t : tuples) {
    const auto* rs = schema.find(t.relation);
    if (rs == nullptr) throw RbacError(ErrorCode::UnknownRelation, t.relation);
    ordered.push_back(&t);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [&](const Tuple* a, const Tuple* b) {
    return schema.find(a->relation)->load_rank < schema.find(b->relation)->load_rank;
  });
  for (const auto* t : ordered) txn.insert(*t);
}

}  // namespace rbac
