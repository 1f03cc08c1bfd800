#pragma once

// Command-line front end shared by the bethe3 binary and its tests.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "report.hpp"
#include "suites.hpp"

namespace bethe3::cli {

enum ExitCode : int { kAllPassed = 0, kChecksFailed = 1, kConfigInvalid = 2 };

struct Overrides {
  std::optional<std::string> config_path;
  std::vector<std::string> suites;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<unsigned> threads;
  std::optional<double> tol;
};

/// Loads the file (if any) and applies flag overrides. Suites given on the
/// command line replace the configured list.
inline SuiteConfig resolve_config(const Overrides& o) {
  SuiteConfig cfg = o.config_path ? parse_config_file(*o.config_path) : SuiteConfig{};
  if (!o.suites.empty()) cfg.suites = resolve_suites(o.suites);
  if (o.seed) cfg.seed = *o.seed;
  if (o.mode) cfg.mode = *o.mode;
  if (o.threads) cfg.threads = *o.threads;
  if (o.tol) {
    if (!(*o.tol > 0)) throw ConfigError("--tol must be positive");
    cfg.tol.float_eq = *o.tol;
  }
  validate(cfg);
  return cfg;
}

/// Runs the CLI on argv-style arguments (args[0] is the program name).
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"bethe3: checks for the nested algebraic Bethe ansatz of gl(3) chains", "bethe3"};
  Overrides o;
  std::string out_path = "-";
  bool print_config = false, list = false;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string mode;
  unsigned threads = 1;
  double tol = 0;
  auto* c_opt = app.add_option("--config", config_path, "TOML configuration file");
  app.add_option("--suite", o.suites, "suite to run (repeatable; 'all' selects every suite)");
  auto* s_opt = app.add_option("--seed", seed, "random seed");
  auto* m_opt = app.add_option("--mode", mode, "arithmetic for exact-capable suites")->check(CLI::IsMember({"rational", "float"}));
  auto* t_opt = app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
  app.add_option("--out", out_path, "report path ('-' for stdout)");
  auto* tol_opt = app.add_option("--tol", tol, "float-mode comparison tolerance");
  app.add_flag("--print-config", print_config, "print the resolved configuration as TOML and exit");
  app.add_flag("--list-suites", list, "list suite names and exit");
  app.set_version_flag("--version", std::string(kVersion));

  std::reverse(args.begin(), args.end());
  if (!args.empty()) args.pop_back();
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kAllPassed;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kAllPassed;
  } catch (const CLI::ParseError& e) {
    err << "bethe3: " << e.what() << '\n';
    return kConfigInvalid;
  }
  if (list) {
    for (const auto& s : known_suites()) out << s << '\n';
    return kAllPassed;
  }
  if (*c_opt) o.config_path = config_path;
  if (*s_opt) o.seed = seed;
  if (*m_opt) o.mode = mode;
  if (*t_opt) o.threads = threads;
  if (*tol_opt) o.tol = tol;

  Report rep;
  try {
    const SuiteConfig cfg = resolve_config(o);
    if (print_config) {
      out << to_toml(cfg);
      return kAllPassed;
    }
    rep = run_suite(cfg);
  } catch (const ConfigError& e) {
    err << "bethe3: configuration error: " << e.what() << '\n';
    return kConfigInvalid;
  }
  if (out_path == "-") {
    write_report(out, rep);
  } else {
    std::ofstream f(out_path);
    if (!f) {
      err << "bethe3: cannot write report to '" << out_path << "'\n";
      return kConfigInvalid;
    }
    write_report(f, rep);
  }
  const Counts c = rep.counts();
  err << "bethe3: " << c.pass << " passed, " << c.fail << " failed, " << c.skip << " skipped\n";
  return c.fail == 0 ? kAllPassed : kChecksFailed;
}

}  // namespace bethe3::cli
