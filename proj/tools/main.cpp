#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rbac/cli.hpp"

using namespace rbac;

namespace {

struct Common {
  std::string snapshot;
  std::string rules;
  std::string dump;
};

void prepare(cli::Runner& runner, const Common& common) {
  if (!common.snapshot.empty()) {
    runner.engine().load(parse_snapshot_text(cli::read_file(common.snapshot)));
  }
  if (!common.rules.empty()) runner.load_rules_text(cli::read_file(common.rules));
}

int report(const RbacError& e) {
  std::cout << "error " << to_string(e.code()) << ": " << e.detail() << "\n";
  switch (e.code()) {
    case ErrorCode::IoError: return 4;
    case ErrorCode::ParseError: return 2;
    case ErrorCode::AssertFailed: return 3;
    default: return 1;
  }
}

int run_script(const std::string& path, const Common& common, cli::RunOptions options, const std::string& audit_path) {
  cli::Runner runner(options);
  std::ofstream audit;
  try {
    const auto commands = cli::parse_script(cli::read_file(path));
    prepare(runner, common);
    if (!audit_path.empty()) {
      audit.open(audit_path, std::ios::binary | std::ios::trunc);
      if (!audit) throw RbacError(ErrorCode::IoError, "cannot write " + audit_path);
      runner.set_audit(&audit);
    }
    const cli::Summary summary = runner.run(commands, std::cout);
    if (!common.dump.empty()) cli::write_file(common.dump, runner.engine().dump());
    return summary.exit_code();
  } catch (const RbacError& e) {
    return report(e);
  }
}

int repl(const Common& common, cli::RunOptions options) {
  cli::Runner runner(options);
  try {
    prepare(runner, common);
  } catch (const RbacError& e) {
    return report(e);
  }
  cli::Summary summary;
  std::size_t line_no = 0;
  for (std::string line; std::getline(std::cin, line);) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.substr(first) == "quit" || line.substr(first) == "exit") break;
    try {
      const auto cmd = cli::parse_command(line, line_no);
      const auto outcome = runner.execute(cmd);
      std::cout << cli::render(cmd, outcome) << std::flush;
      ++summary.commands;
      if (outcome.status == cli::Outcome::Status::AssertFailed) ++summary.assert_failures;
      if (outcome.status == cli::Outcome::Status::Error) ++summary.errors;
    } catch (const RbacError& e) {
      std::cout << "error " << to_string(e.code()) << ": " << e.detail() << "\n" << std::flush;
    }
  }
  if (!common.dump.empty()) {
    try {
      cli::write_file(common.dump, runner.engine().dump());
    } catch (const RbacError& e) {
      return report(e);
    }
  }
  return summary.exit_code();
}

int replay(const std::string& audit_path, const Common& common) {
  cli::Runner runner;
  try {
    prepare(runner, common);
    cli::replay_audit(runner, cli::read_file(audit_path));
    if (common.dump.empty()) {
      std::cout << runner.engine().dump();
    } else {
      cli::write_file(common.dump, runner.engine().dump());
    }
    return 0;
  } catch (const RbacError& e) {
    return report(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Role-based access control engine and policy script runner"};
  app.require_subcommand(1);

  Common common;
  cli::RunOptions options;
  std::string script;
  std::string audit;
  std::string objective = "edges";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--snapshot", common.snapshot, "Initial state in snapshot format");
    sub->add_option("--rules", common.rules, "Extra rule file for RULES eval");
    sub->add_option("--dump", common.dump, "Write the final snapshot here");
  };
  auto add_tuning = [&](CLI::App* sub) {
    sub->add_option("--fresh-role-cap", options.fresh_role_cap, "Fresh roles a grant plan may create");
    sub->add_option("--plan-depth", options.plan_depth, "Longest plan searched");
    sub->add_option("--role-cap", options.role_cap, "Most roles a minimization may use");
    sub->add_option("--objective", objective, "Minimization objective")->check(CLI::IsMember({"roles", "edges"}));
    sub->add_flag("--oracle", options.oracle)->group("");
  };

  auto* run = app.add_subcommand("run", "Run a policy script");
  run->add_option("script", script, "Script path")->required();
  run->add_flag("--halt-on-error", options.halt_on_error, "Stop at the first failed command");
  run->add_option("--audit", audit, "Append one line per mutating command");
  add_common(run);
  add_tuning(run);

  auto* rep = app.add_subcommand("repl", "Read commands from standard input");
  add_common(rep);
  add_tuning(rep);

  std::string audit_in;
  auto* play = app.add_subcommand("replay", "Re-apply the successful commands of an audit log");
  play->add_option("audit", audit_in, "Audit log path")->required();
  add_common(play);

  CLI11_PARSE(app, argc, argv);
  options.objective = objective == "roles" ? admin::Objective::Roles : admin::Objective::Edges;

  if (run->parsed()) return run_script(script, common, options, audit);
  if (rep->parsed()) return repl(common, options);
  return replay(audit_in, common);
}
