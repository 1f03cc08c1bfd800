#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "app.hpp"

using namespace bethe3;
using namespace bethe3::cli;

namespace {

/// The first ```toml block of the README.
std::string readme_example() {
  std::ifstream in(std::string(BETHE3_SOURCE_DIR) + "/README.md");
  std::string line, out;
  bool inside = false;
  while (std::getline(in, line)) {
    if (!inside && line == "```toml") {
      inside = true;
    } else if (inside && line == "```") {
      return out;
    } else if (inside) {
      out += line + "\n";
    }
  }
  return {};
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "bethe3");
  std::ostringstream out, err;
  const int rc = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  return rc;
}

std::vector<nlohmann::json> lines_of(const std::string& text) {
  std::vector<nlohmann::json> v;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) v.push_back(nlohmann::json::parse(line));
  return v;
}

SuiteConfig small(std::vector<std::string> suites) {
  SuiteConfig c;
  c.suites = std::move(suites);
  c.draws = 2;
  c.points = 4;
  return c;
}

}  // namespace

TEST(Config, ReadmeExampleParsesAndRoundTrips) {
  const std::string text = readme_example();
  ASSERT_FALSE(text.empty());
  const SuiteConfig c = parse_config_string(text, "README.md");
  EXPECT_EQ(c.suites.size(), known_suites().size());
  const SuiteConfig again = parse_config_string(to_toml(c), "round-trip");
  EXPECT_EQ(canonical_json(again), canonical_json(c));
  EXPECT_EQ(again.threads, c.threads);
}

TEST(Config, DefaultsRoundTrip) {
  const SuiteConfig c;
  EXPECT_EQ(canonical_json(parse_config_string(to_toml(c))), canonical_json(c));
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config_string("suites = [\"nope\"]"), ConfigError);
  EXPECT_THROW(parse_config_string("sedd = 3"), ConfigError);
  EXPECT_THROW(parse_config_string("[chain]\nlenght = 2"), ConfigError);
  EXPECT_THROW(parse_config_string("seed = "), ConfigError);
  EXPECT_THROW(parse_config_string("mode = \"double\""), ConfigError);
  EXPECT_THROW(parse_config_string("[chain]\nlengths = [2, 3]\nxi = [\"0\", \"1/2\"]"), ConfigError);
  EXPECT_THROW(parse_config_string("[onshell]\nkappas = [0.0]"), ConfigError);
}

TEST(Config, AllAliasExpandsInOrder) {
  const auto s = resolve_suites({"bench", "all", "bench"});
  EXPECT_EQ(s.front(), "bench");
  EXPECT_EQ(s.size(), known_suites().size());
}

TEST(Config, PoleHittingChainIsAConfigError) {
  SuiteConfig c = small({"actions"});
  c.xi = {"0", "1"};
  EXPECT_THROW(plan(c), ConfigError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"--suite", "nope"}), kConfigInvalid);
  EXPECT_EQ(run({"--mode", "double"}), kConfigInvalid);
  EXPECT_EQ(run({"--threads", "0"}), kConfigInvalid);
  EXPECT_EQ(run({"--tol", "-1"}), kConfigInvalid);
  EXPECT_EQ(run({"--config", "/nonexistent/bethe3.toml"}), kConfigInvalid);
  std::string text;
  EXPECT_EQ(run({}, &text), kAllPassed);
  const auto lines = lines_of(text);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0]["type"], "summary");
  EXPECT_EQ(lines[0]["counts"]["total"], 0);
}

TEST(Cli, FailingChecksExitWithOne) {
  // A tolerance this small fails float-mode comparisons that do not agree bitwise.
  std::string text;
  const int rc = run({"--suite", "actions", "--mode", "float", "--tol", "1e-300"}, &text);
  const auto lines = lines_of(text);
  const auto& summary = lines.back();
  EXPECT_EQ(rc, summary["counts"]["fail"].get<int>() > 0 ? kChecksFailed : kAllPassed);
}

TEST(Cli, PrintConfigAndListSuites) {
  std::string text;
  EXPECT_EQ(run({"--suite", "bae", "--seed", "9", "--print-config"}, &text), kAllPassed);
  const SuiteConfig c = parse_config_string(text);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.suites, std::vector<std::string>{"bae"});
  EXPECT_EQ(run({"--list-suites"}, &text), kAllPassed);
  EXPECT_NE(text.find("form-factors"), std::string::npos);
}

TEST(Cli, ReportSchema) {
  std::string text;
  EXPECT_EQ(run({"--suite", "reshetikhin", "--threads", "2"}, &text), kAllPassed);
  const auto lines = lines_of(text);
  ASSERT_GT(lines.size(), 1u);
  for (const auto& l : lines) EXPECT_EQ(l["schema"], kReportSchema);
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    EXPECT_EQ(lines[i]["type"], "check");
    EXPECT_EQ(lines[i]["suite"], "reshetikhin");
    EXPECT_EQ(lines[i]["status"], "pass");
  }
  EXPECT_EQ(lines.back()["runtime"]["threads"], 2);
  EXPECT_EQ(lines.back()["counts"]["pass"].get<std::size_t>(), lines.size() - 1);
}

TEST(Suites, BetheEquivalencePasses) {
  SuiteConfig c = small({"bethe-equivalence"});
  const Report r = run_suite(c);
  EXPECT_GT(r.records.size(), 10u);
  EXPECT_TRUE(r.all_passed());
}

TEST(Suites, SerialAndParallelReportsAgree) {
  SuiteConfig c = small({"actions", "highest-coeff", "bae", "bench"});
  c.threads = 1;
  const auto serial = comparable_lines(run_suite(c));
  c.threads = 4;
  const auto parallel = comparable_lines(run_suite(c));
  EXPECT_EQ(serial, parallel);
}

TEST(Suites, SeedChangesDraws) {
  SuiteConfig c = small({"actions"});
  const auto a = comparable_lines(run_suite(c));
  c.seed = 2;
  EXPECT_NE(a, comparable_lines(run_suite(c)));
}

TEST(Suites, BenchTermCounts) {
  const Report r = run_suite(small({"bench"}));
  std::map<std::string, std::size_t> terms;
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.status, Status::pass) << rec.name;
    terms[rec.name] = rec.params["terms_serial"].get<std::size_t>();
    EXPECT_EQ(rec.params["terms_parallel"], rec.params["terms_serial"]);
  }
  EXPECT_EQ(terms["terms/a=1,b=1"], 4u);
  EXPECT_EQ(terms["terms/a=2,b=0"], 6u);
  EXPECT_EQ(terms["terms/a=4,b=4"], 4900u);
}

TEST(Suites, FloatModeSkipsExactOnlySuites) {
  SuiteConfig c = small({"contour", "residues"});
  c.mode = "float";
  const Report r = run_suite(c);
  ASSERT_FALSE(r.records.empty());
  for (const auto& rec : r.records) EXPECT_EQ(rec.status, Status::skip);
}
