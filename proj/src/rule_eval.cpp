#include <functional>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "rbac/rule_engine.hpp"

namespace rbac::rules {

namespace {

const Relation kEmpty;

const Relation& lookup(const Database& db, std::string_view relation) {
  auto it = db.find(relation);
  return it == db.end() ? kEmpty : it->second;
}

Database seed(const RuleProgram& program, const Database& edb) {
  Database db;
  for (const auto& [name, arity] : program.edb()) {
    for (const auto& row : lookup(edb, name)) {
      if (row.size() == arity) db[name].insert(row);
    }
  }
  for (const auto& [name, arity] : program.idb()) db[name];
  return db;
}

Database idb_part(const RuleProgram& program, Database& db) {
  Database out;
  for (const auto& [name, arity] : program.idb()) out[name] = std::move(db[name]);
  return out;
}

// Naive matching with string bindings: the straightforward reading of a rule.
void match(const Rule& rule, std::size_t i, const Database& db, std::map<std::string, std::string>& binding,
           Relation& out) {
  if (i == rule.body.size()) {
    Row head;
    for (const auto& t : rule.head.args) head.push_back(t.variable ? binding.at(t.text) : t.text);
    out.insert(std::move(head));
    return;
  }
  const Atom& atom = rule.body[i];
  for (const auto& row : lookup(db, atom.relation)) {
    std::vector<std::string> fresh;
    bool ok = true;
    for (std::size_t k = 0; k < atom.args.size() && ok; ++k) {
      const Term& t = atom.args[k];
      if (!t.variable) {
        ok = row[k] == t.text;
      } else if (auto it = binding.find(t.text); it != binding.end()) {
        ok = it->second == row[k];
      } else {
        binding.emplace(t.text, row[k]);
        fresh.push_back(t.text);
      }
    }
    if (ok) match(rule, i + 1, db, binding, out);
    for (const auto& v : fresh) binding.erase(v);
  }
}

}  // namespace

Database evaluate(const RuleProgram& program, const Database& edb) {
  Database db = seed(program, edb);
  for (;;) {
    Database derived;
    for (const auto& rule : program.rules()) {
      std::map<std::string, std::string> binding;
      match(rule, 0, db, binding, derived[rule.head.relation]);
    }
    bool changed = false;
    for (auto& [name, rows] : derived) {
      auto& target = db[name];
      for (auto& row : rows) changed |= target.insert(row).second;
    }
    if (!changed) break;
  }
  return idb_part(program, db);
}

namespace {

using IRow = std::vector<int>;

struct IRowHash {
  std::size_t operator()(const IRow& row) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int v : row) h = (h ^ static_cast<std::size_t>(v)) * 0x100000001b3ULL;
    return h;
  }
};

struct Table {
  std::vector<IRow> rows;
  std::unordered_set<IRow, IRowHash> set;

  bool add(const IRow& row) {
    if (!set.insert(row).second) return false;
    rows.push_back(row);
    return true;
  }
};

// Argument of a compiled atom: a constant id, or a variable slot.
struct Arg {
  bool variable;
  int value;
};

struct CompiledAtom {
  int relation;
  std::vector<Arg> args;
  // Positions whose value is known before this atom is matched.
  std::vector<std::size_t> bound;
};

struct CompiledRule {
  CompiledAtom head;
  std::vector<CompiledAtom> body;
  int slots = 0;
};

using Index = std::unordered_map<IRow, std::vector<std::size_t>, IRowHash>;

class SemiNaive {
 public:
  SemiNaive(const RuleProgram& program, const Database& edb) {
    for (const auto& [name, arity] : program.edb()) relation_id(name);
    for (const auto& [name, arity] : program.idb()) {
      idb_.push_back(relation_id(name));
    }
    total_.resize(names_.size());
    for (const auto& [name, arity] : program.edb()) {
      Table& t = total_[relation_id(name)];
      for (const auto& row : lookup(edb, name)) {
        if (row.size() != arity) continue;
        IRow irow;
        for (const auto& f : row) irow.push_back(intern(f));
        t.add(irow);
      }
    }
    for (const auto& rule : program.rules()) rules_.push_back(compile(rule));
  }

  void run() {
    // First round: every rule over the base facts.
    std::vector<Table> next(names_.size());
    for (const auto& rule : rules_) fire(rule, std::nullopt, next);
    while (commit(next)) {
      std::vector<Table> produced(names_.size());
      for (const auto& rule : rules_) {
        for (std::size_t i = 0; i < rule.body.size(); ++i) {
          if (!delta_[rule.body[i].relation].rows.empty()) fire(rule, i, produced);
        }
      }
      next = std::move(produced);
    }
  }

  Database result(const RuleProgram& program) const {
    Database out;
    for (const auto& [name, arity] : program.idb()) {
      auto& rel = out[name];
      for (const auto& row : total_[ids_.at(name)].rows) {
        Row r;
        for (int v : row) r.push_back(constants_[v]);
        rel.insert(std::move(r));
      }
    }
    return out;
  }

 private:
  int relation_id(const std::string& name) {
    auto [it, inserted] = ids_.emplace(name, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(name);
    return it->second;
  }

  int intern(const std::string& text) {
    auto [it, inserted] = constant_ids_.emplace(text, static_cast<int>(constants_.size()));
    if (inserted) constants_.push_back(text);
    return it->second;
  }

  CompiledRule compile(const Rule& rule) {
    CompiledRule out;
    std::map<std::string, int> slots;
    auto arg = [&](const Term& t) {
      if (!t.variable) return Arg{false, intern(t.text)};
      auto [it, inserted] = slots.emplace(t.text, static_cast<int>(slots.size()));
      return Arg{true, it->second};
    };
    for (const auto& atom : rule.body) {
      CompiledAtom a{relation_id(atom.relation), {}, {}};
      const auto seen = slots;
      for (std::size_t k = 0; k < atom.args.size(); ++k) {
        const Term& t = atom.args[k];
        if (!t.variable || seen.contains(t.text)) a.bound.push_back(k);
        a.args.push_back(arg(t));
      }
      out.body.push_back(std::move(a));
    }
    out.head.relation = relation_id(rule.head.relation);
    for (const auto& t : rule.head.args) out.head.args.push_back(arg(t));
    out.slots = static_cast<int>(slots.size());
    return out;
  }

  // Moves new facts into the totals; they become the next delta.
  bool commit(std::vector<Table>& produced) {
    delta_.assign(names_.size(), Table{});
    indexes_.clear();
    bool any = false;
    for (int r : idb_) {
      for (const auto& row : produced[r].rows) {
        if (total_[r].add(row)) {
          delta_[r].add(row);
          any = true;
        }
      }
    }
    return any;
  }

  const Index& index(int relation, bool delta, const CompiledAtom& atom) {
    std::string key = std::to_string(relation) + (delta ? "d" : "t");
    for (auto k : atom.bound) key += "," + std::to_string(k);
    auto [it, inserted] = indexes_.try_emplace(key);
    if (inserted) {
      const Table& t = delta ? delta_[relation] : total_[relation];
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        IRow k;
        for (auto p : atom.bound) k.push_back(t.rows[i][p]);
        it->second[std::move(k)].push_back(i);
      }
    }
    return it->second;
  }

  void fire(const CompiledRule& rule, std::optional<std::size_t> delta_at, std::vector<Table>& out) {
    std::vector<int> binding(rule.slots, -1);
    join(rule, 0, delta_at, binding, out);
  }

  void join(const CompiledRule& rule, std::size_t i, std::optional<std::size_t> delta_at, std::vector<int>& binding,
            std::vector<Table>& out) {
    if (i == rule.body.size()) {
      IRow head;
      for (const auto& a : rule.head.args) head.push_back(a.variable ? binding[a.value] : a.value);
      if (!total_[rule.head.relation].set.contains(head)) out[rule.head.relation].add(head);
      return;
    }
    const CompiledAtom& atom = rule.body[i];
    const bool use_delta = delta_at == i;
    const Table& table = use_delta ? delta_[atom.relation] : total_[atom.relation];

    auto try_row = [&](const IRow& row) {
      std::vector<int> fresh;
      bool ok = true;
      for (std::size_t k = 0; k < atom.args.size() && ok; ++k) {
        const Arg& a = atom.args[k];
        if (!a.variable) {
          ok = row[k] == a.value;
        } else if (binding[a.value] >= 0) {
          ok = binding[a.value] == row[k];
        } else {
          binding[a.value] = row[k];
          fresh.push_back(a.value);
        }
      }
      if (ok) join(rule, i + 1, delta_at, binding, out);
      for (int slot : fresh) binding[slot] = -1;
    };

    if (atom.bound.empty()) {
      for (std::size_t r = 0; r < table.rows.size(); ++r) try_row(table.rows[r]);
      return;
    }
    IRow key;
    for (auto p : atom.bound) {
      const Arg& a = atom.args[p];
      key.push_back(a.variable ? binding[a.value] : a.value);
    }
    const Index& idx = index(atom.relation, use_delta, atom);
    auto it = idx.find(key);
    if (it == idx.end()) return;
    for (auto r : it->second) try_row(table.rows[r]);
  }

  std::map<std::string, int, std::less<>> ids_;
  std::vector<std::string> names_;
  std::vector<int> idb_;
  std::unordered_map<std::string, int> constant_ids_;
  std::vector<std::string> constants_;
  std::vector<CompiledRule> rules_;
  std::vector<Table> total_;
  std::vector<Table> delta_;
  std::unordered_map<std::string, Index> indexes_;
};

}  // namespace

Database evaluate_seminaive(const RuleProgram& program, const Database& edb) {
  SemiNaive engine(program, edb);
  engine.run();
  return engine.result(program);
}

}  // namespace rbac::rules
