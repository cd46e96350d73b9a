#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbac/admin_search.hpp"
#include "rbac/engine.hpp"
#include "rbac/rule_engine.hpp"

namespace rbac::cli {

struct Command;

struct Assertion {
  enum class Mode { Equals, Count, Cost, Fails, Ok };
  std::shared_ptr<const Command> inner;
  Mode mode = Mode::Equals;
  std::string expected;  // raw text after the mode keyword
};

// One script line: `Verb arg1 arg2 ...`. Arguments are kept as written;
// their shapes (permission, set, number) are checked by the parser.
struct Command {
  std::size_t line = 0;
  std::string text;
  std::string verb;
  std::vector<std::string> args;
  std::optional<Assertion> assertion;
};

/// Parses one command line. `line` is used in error positions.
Command parse_command(std::string_view text, std::size_t line = 1);

/// Parses a script. `#` lines and blank lines are skipped. Throws
/// PARSE_ERROR (`line L, column C: expected ...`) at the first bad line.
std::vector<Command> parse_script(std::string_view text);

/// True for verbs that commit (or try to commit) a new version.
bool is_mutation(const Command& command);

struct RunOptions {
  bool halt_on_error = false;
  std::size_t fresh_role_cap = 2;
  std::size_t plan_depth = 6;
  std::size_t role_cap = 6;
  admin::Objective objective = admin::Objective::Edges;
  // Cross-check results against the reference oracles.
  bool oracle = false;
};

struct Outcome {
  enum class Status { Ok, Error, AssertFailed };
  Status status = Status::Ok;
  std::optional<ErrorCode> code;
  std::string message;               // error detail or a one-line status
  std::vector<std::string> items;    // query result lines
  std::vector<std::string> notes;    // `# ...` lines after the items
  std::vector<std::string> witness;  // tuples behind a rejected commit
  std::optional<std::size_t> cost;
  bool is_query = false;
};

struct Summary {
  std::size_t commands = 0;
  std::size_t errors = 0;
  std::size_t assert_failures = 0;
  std::size_t io_errors = 0;
  bool halted = false;

  /// 0 ok, 1 command error, 3 assertion failure, 4 I/O failure.
  int exit_code() const;
};

class Runner {
 public:
  explicit Runner(RunOptions options = {});

  Engine& engine() { return engine_; }
  const Engine& engine() const { return engine_; }
  RunOptions& options() { return options_; }
  const rules::RuleProgram& rules() const { return rules_; }

  /// Mutating commands append `version<TAB>command<TAB>ok|error:CODE`.
  void set_audit(std::ostream* audit) { audit_ = audit; }
  void load_rules_text(std::string_view text);

  Outcome execute(const Command& command);

  /// Executes in order, printing `> command` and the outcome for each, then
  /// a summary line.
  Summary run(const std::vector<Command>& commands, std::ostream& out);

 private:
  Outcome dispatch(const Command& command);
  Outcome assertion(const Command& command);
  void audit(const Command& command, const Outcome& outcome);

  RunOptions options_;
  Engine engine_;
  rules::RuleProgram rules_;
  std::ostream* audit_ = nullptr;
};

/// Renders the `> command` echo plus the outcome lines.
std::string render(const Command& command, const Outcome& outcome);

/// Re-executes the `ok` lines of an audit log on `runner`, checking that
/// each commit lands on the logged version. Throws ASSERT_FAILED on the
/// first divergence.
void replay_audit(Runner& runner, std::string_view audit_text);

/// Whole-file helpers; throw IO_ERROR.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace rbac::cli
