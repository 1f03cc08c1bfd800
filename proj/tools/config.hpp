#pragma once

// Suite configuration: TOML ingestion, flag overrides and a canonical JSON
// form used for the report echo and for round-trip checks.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "bethe3/errors.hpp"

namespace bethe3::cli {

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> names = {
      "ybe-rtt",   "bethe-equivalence", "actions",     "reshetikhin", "highest-coeff", "residues",
      "contour",   "twisted-det",       "bae",         "form-factors", "bench"};
  return names;
}

/// Expands "all" and drops repeated names, keeping first occurrences.
inline std::vector<std::string> resolve_suites(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  auto push = [&](const std::string& n) {
    for (const auto& o : out)
      if (o == n) return;
    out.push_back(n);
  };
  for (const auto& n : names) {
    if (n == "all") {
      for (const auto& k : known_suites()) push(k);
    } else {
      push(n);
    }
  }
  return out;
}

/// A chain used by the on-shell suites: float inhomogeneities, site kinds
/// ("f" or "d") and the (a,b) sectors to solve on it.
struct OnShellChain {
  std::vector<double> xi;
  std::vector<std::string> kinds;
  std::vector<std::pair<int, int>> cases;
};

struct Tolerances {
  double float_eq = 1e-9;       ///< float-mode equality in exact-capable suites
  double residual = 1e-12;      ///< Bethe-equation residual
  double certificate = 1e-8;    ///< eigenvector certificate
  double twisted = 1e-8;        ///< twisted determinant vs oracle
  double form_factor = 1e-7;    ///< form factors and sum rules
  double p_spread = 1e-9;       ///< p-independence of det N^(s,p)
  double q_kappa = 1e-5;        ///< numeric kappa derivative
};

struct SuiteConfig {
  std::uint64_t seed = 1;
  std::string mode = "rational";
  unsigned threads = 1;
  std::vector<std::string> suites;

  // Chain for the exact-capable suites.
  std::vector<int> lengths = {2};
  std::string c = "1";
  /// Empty means random draws; otherwise one rational literal per site (single length only).
  std::vector<std::string> xi;
  /// "alternating" (f,d,f,...), "fundamental", or an explicit list.
  std::vector<std::string> kinds = {"alternating"};

  int a_max = 2, b_max = 2, n_max = 2;
  int action_a_max = 2, action_b_max = 1;
  std::vector<std::pair<int, int>> reshetikhin_cases = {{0, 0}, {1, 0}, {0, 1}, {1, 1},
                                                         {2, 0}, {2, 1}, {1, 2}};
  std::vector<std::pair<int, int>> residue_cases = {{1, 1}, {2, 1}, {1, 2}};
  int draws = 5;
  int points = 20;

  double onshell_c = 1.0;
  std::vector<OnShellChain> onshell_chains = {
      {{0.3, -0.45, 1.1, 0.25, 0.8}, {"f", "f", "d", "d", "f"}, {{1, 0}, {0, 1}, {1, 1}, {2, 1}}},
      {{0.3, -0.45, 1.1, 0.25, 0.8}, {"f", "f", "d", "d", "d"}, {{1, 2}}}};
  std::vector<double> kappas = {0.7, 1.3};
  std::vector<std::pair<int, int>> twisted_cases = {{1, 0}, {0, 1}, {1, 1}};
  std::size_t restarts = 32;
  double z_re = 0.37, z_im = 0.21;
  double q_step = 1e-4;

  std::vector<std::pair<int, int>> bench_cases = {{1, 1}, {2, 0}, {4, 4}};
  int bench_repetitions = 1;
  unsigned bench_threads = 4;

  Tolerances tol;
};

namespace detail {

inline std::string node_to_literal(const toml::node& n, const std::string& where) {
  if (auto s = n.value<std::string>()) return *s;
  if (n.is_integer()) return std::to_string(*n.value<std::int64_t>());
  throw ConfigError(where + ": expected an integer or a rational string like \"1/3\"");
}

inline std::vector<std::pair<int, int>> parse_pairs(const toml::node& n, const std::string& where) {
  const auto* arr = n.as_array();
  if (!arr) throw ConfigError(where + ": expected an array of [a, b] pairs");
  std::vector<std::pair<int, int>> out;
  for (const auto& e : *arr) {
    const auto* p = e.as_array();
    if (!p || p->size() != 2 || !(*p)[0].is_integer() || !(*p)[1].is_integer())
      throw ConfigError(where + ": each entry must be [a, b] with integers");
    const auto a = *(*p)[0].value<std::int64_t>(), b = *(*p)[1].value<std::int64_t>();
    if (a < 0 || b < 0 || a > 8 || b > 8) throw ConfigError(where + ": cardinalities must be in 0..8");
    out.emplace_back(static_cast<int>(a), static_cast<int>(b));
  }
  return out;
}

template <class T>
void read(const toml::table& t, const char* key, T& out, const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if constexpr (std::is_same_v<T, std::string>) {
    auto v = n->value<std::string>();
    if (!v) throw ConfigError(where + "." + key + ": expected a string");
    out = *v;
  } else if constexpr (std::is_same_v<T, double>) {
    auto v = n->value<double>();
    if (!v) throw ConfigError(where + "." + key + ": expected a number");
    out = *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    auto v = n->value<bool>();
    if (!v) throw ConfigError(where + "." + key + ": expected a boolean");
    out = *v;
  } else {
    auto v = n->value<std::int64_t>();
    if (!v || *v < 0) throw ConfigError(where + "." + key + ": expected a non-negative integer");
    out = static_cast<T>(*v);
  }
}

inline std::vector<std::string> read_strings(const toml::node& n, const std::string& where) {
  std::vector<std::string> out;
  if (auto s = n.value<std::string>()) {
    out.push_back(*s);
    return out;
  }
  const auto* arr = n.as_array();
  if (!arr) throw ConfigError(where + ": expected a string or an array of strings");
  for (const auto& e : *arr) {
    auto s = e.value<std::string>();
    if (!s) throw ConfigError(where + ": expected strings");
    out.push_back(*s);
  }
  return out;
}

inline std::vector<double> read_doubles(const toml::node& n, const std::string& where) {
  const auto* arr = n.as_array();
  if (!arr) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *arr) {
    auto v = e.value<double>();
    if (!v) throw ConfigError(where + ": expected numbers");
    out.push_back(*v);
  }
  return out;
}

inline void reject_unknown(const toml::table& t, std::initializer_list<std::string_view> keys,
                           const std::string& where) {
  for (const auto& [k, v] : t) {
    bool ok = false;
    for (auto key : keys) ok = ok || (k.str() == key);
    if (!ok) throw ConfigError("unknown key \"" + (where.empty() ? "" : where + ".") + std::string(k.str()) + "\"");
  }
}

}  // namespace detail

/// Checks cross-field constraints; throws ConfigError.
inline void validate(const SuiteConfig& c) {
  if (c.mode != "rational" && c.mode != "float")
    throw ConfigError("mode must be \"rational\" or \"float\", got \"" + c.mode + "\"");
  for (const auto& s : c.suites) {
    bool ok = false;
    for (const auto& k : known_suites()) ok = ok || (s == k);
    if (!ok) throw ConfigError("unknown suite \"" + s + "\"");
  }
  if (c.lengths.empty()) throw ConfigError("chain.lengths must not be empty");
  for (int L : c.lengths)
    if (L < 1 || L > 6) throw ConfigError("chain lengths must be in 1..6");
  if (!c.xi.empty()) {
    if (c.lengths.size() != 1 || static_cast<int>(c.xi.size()) != c.lengths[0])
      throw ConfigError("explicit chain.xi needs exactly one length equal to its size");
  }
  if (c.kinds.empty()) throw ConfigError("chain.kinds must not be empty");
  if (c.kinds.size() > 1 || (c.kinds[0] != "alternating" && c.kinds[0] != "fundamental")) {
    for (const auto& k : c.kinds)
      if (k != "f" && k != "d") throw ConfigError("chain.kinds entries must be \"f\" or \"d\"");
    for (int L : c.lengths)
      if (static_cast<int>(c.kinds.size()) != L)
        throw ConfigError("explicit chain.kinds needs one entry per site");
  }
  if (c.a_max < 0 || c.b_max < 0 || c.n_max < 1) throw ConfigError("caps must be non-negative, n_max >= 1");
  if (c.a_max > 4 || c.b_max > 4 || c.n_max > 4) throw ConfigError("caps above 4 are not supported");
  if (c.draws < 1 || c.points < 1) throw ConfigError("samples.draws and samples.points must be >= 1");
  if (c.threads < 1 || c.threads > 256) throw ConfigError("threads must be in 1..256");
  if (c.bench_threads < 1 || c.bench_threads > 256) throw ConfigError("bench.threads must be in 1..256");
  for (const auto& ch : c.onshell_chains) {
    if (ch.xi.size() != ch.kinds.size() || ch.xi.empty())
      throw ConfigError("onshell chain needs matching non-empty xi and kinds");
    if (ch.xi.size() > 6) throw ConfigError("onshell chains are limited to 6 sites");
    for (const auto& k : ch.kinds)
      if (k != "f" && k != "d") throw ConfigError("onshell kinds entries must be \"f\" or \"d\"");
  }
  for (double k : c.kappas)
    if (k == 0) throw ConfigError("kappa must be nonzero");
}

/// Parses a TOML document (already read into memory).
inline SuiteConfig parse_config_string(const std::string& text, const std::string& origin = "config") {
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << origin << ": " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(os.str());
  }
  SuiteConfig c;
  using detail::read;
  detail::reject_unknown(root, {"seed", "mode", "threads", "suites", "chain", "caps", "samples", "onshell", "bench", "tolerances"}, "");
  read(root, "seed", c.seed, "");
  read(root, "mode", c.mode, "");
  read(root, "threads", c.threads, "");
  if (const auto* n = root.get("suites")) c.suites = resolve_suites(detail::read_strings(*n, "suites"));

  if (const auto* t = root.get_as<toml::table>("chain")) {
    detail::reject_unknown(*t, {"length", "lengths", "c", "xi", "kinds"}, "chain");
    if (const auto* n = t->get("length")) {
      auto v = n->value<std::int64_t>();
      if (!v) throw ConfigError("chain.length: expected an integer");
      c.lengths = {static_cast<int>(*v)};
    }
    if (const auto* n = t->get("lengths")) {
      const auto* arr = n->as_array();
      if (!arr) throw ConfigError("chain.lengths: expected an array");
      c.lengths.clear();
      for (const auto& e : *arr) {
        auto v = e.value<std::int64_t>();
        if (!v) throw ConfigError("chain.lengths: expected integers");
        c.lengths.push_back(static_cast<int>(*v));
      }
    }
    if (const auto* n = t->get("c")) c.c = detail::node_to_literal(*n, "chain.c");
    if (const auto* n = t->get("xi")) {
      if (auto s = n->value<std::string>(); s && *s == "random") {
        c.xi.clear();
      } else if (const auto* arr = n->as_array()) {
        c.xi.clear();
        for (const auto& e : *arr) c.xi.push_back(detail::node_to_literal(e, "chain.xi"));
      } else {
        throw ConfigError("chain.xi: expected \"random\" or an array");
      }
    }
    if (const auto* n = t->get("kinds")) c.kinds = detail::read_strings(*n, "chain.kinds");
  }
  if (const auto* t = root.get_as<toml::table>("caps")) {
    detail::reject_unknown(*t, {"a_max", "b_max", "n_max", "action_a_max", "action_b_max", "reshetikhin", "residues"}, "caps");
    read(*t, "a_max", c.a_max, "caps");
    read(*t, "b_max", c.b_max, "caps");
    read(*t, "n_max", c.n_max, "caps");
    read(*t, "action_a_max", c.action_a_max, "caps");
    read(*t, "action_b_max", c.action_b_max, "caps");
    if (const auto* n = t->get("reshetikhin")) c.reshetikhin_cases = detail::parse_pairs(*n, "caps.reshetikhin");
    if (const auto* n = t->get("residues")) c.residue_cases = detail::parse_pairs(*n, "caps.residues");
  }
  if (const auto* t = root.get_as<toml::table>("samples")) {
    detail::reject_unknown(*t, {"draws", "points"}, "samples");
    read(*t, "draws", c.draws, "samples");
    read(*t, "points", c.points, "samples");
  }
  if (const auto* t = root.get_as<toml::table>("onshell")) {
    detail::reject_unknown(*t, {"c", "restarts", "z_re", "z_im", "q_step", "kappas", "twisted_cases", "chains"}, "onshell");
    read(*t, "c", c.onshell_c, "onshell");
    read(*t, "restarts", c.restarts, "onshell");
    read(*t, "z_re", c.z_re, "onshell");
    read(*t, "z_im", c.z_im, "onshell");
    read(*t, "q_step", c.q_step, "onshell");
    if (const auto* n = t->get("kappas")) c.kappas = detail::read_doubles(*n, "onshell.kappas");
    if (const auto* n = t->get("twisted_cases")) c.twisted_cases = detail::parse_pairs(*n, "onshell.twisted_cases");
    if (const auto* n = t->get("chains")) {
      const auto* arr = n->as_array();
      if (!arr) throw ConfigError("onshell.chains: expected an array of tables");
      c.onshell_chains.clear();
      for (const auto& e : *arr) {
        const auto* ct = e.as_table();
        if (!ct) throw ConfigError("onshell.chains: expected tables");
        detail::reject_unknown(*ct, {"xi", "kinds", "cases"}, "onshell.chains");
        OnShellChain ch;
        if (const auto* x = ct->get("xi")) ch.xi = detail::read_doubles(*x, "onshell.chains.xi");
        if (const auto* x = ct->get("kinds")) ch.kinds = detail::read_strings(*x, "onshell.chains.kinds");
        if (const auto* x = ct->get("cases")) ch.cases = detail::parse_pairs(*x, "onshell.chains.cases");
        c.onshell_chains.push_back(std::move(ch));
      }
    }
  }
  if (const auto* t = root.get_as<toml::table>("bench")) {
    detail::reject_unknown(*t, {"repetitions", "threads", "cases"}, "bench");
    read(*t, "repetitions", c.bench_repetitions, "bench");
    read(*t, "threads", c.bench_threads, "bench");
    if (const auto* n = t->get("cases")) c.bench_cases = detail::parse_pairs(*n, "bench.cases");
  }
  if (const auto* t = root.get_as<toml::table>("tolerances")) {
    detail::reject_unknown(*t, {"float", "residual", "certificate", "twisted", "form_factor", "p_spread", "q_kappa"}, "tolerances");
    read(*t, "float", c.tol.float_eq, "tolerances");
    read(*t, "residual", c.tol.residual, "tolerances");
    read(*t, "certificate", c.tol.certificate, "tolerances");
    read(*t, "twisted", c.tol.twisted, "tolerances");
    read(*t, "form_factor", c.tol.form_factor, "tolerances");
    read(*t, "p_spread", c.tol.p_spread, "tolerances");
    read(*t, "q_kappa", c.tol.q_kappa, "tolerances");
  }
  validate(c);
  return c;
}

inline SuiteConfig parse_config_file(const std::string& path) {
  toml::table root;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path);
}

namespace detail {

inline nlohmann::json pairs_json(const std::vector<std::pair<int, int>>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& [x, y] : v) a.push_back({x, y});
  return a;
}

}  // namespace detail

/// Canonical JSON form: every resolved field, keys sorted. The thread count is
/// a runtime property and is deliberately not part of it.
inline nlohmann::json canonical_json(const SuiteConfig& c) {
  using nlohmann::json;
  json chains = json::array();
  for (const auto& ch : c.onshell_chains)
    chains.push_back({{"xi", ch.xi}, {"kinds", ch.kinds}, {"cases", detail::pairs_json(ch.cases)}});
  return {
      {"seed", c.seed},
      {"mode", c.mode},
      {"suites", c.suites},
      {"chain", {{"lengths", c.lengths}, {"c", c.c}, {"xi", c.xi.empty() ? json("random") : json(c.xi)}, {"kinds", c.kinds}}},
      {"caps",
       {{"a_max", c.a_max},
        {"b_max", c.b_max},
        {"n_max", c.n_max},
        {"action_a_max", c.action_a_max},
        {"action_b_max", c.action_b_max},
        {"reshetikhin", detail::pairs_json(c.reshetikhin_cases)},
        {"residues", detail::pairs_json(c.residue_cases)}}},
      {"samples", {{"draws", c.draws}, {"points", c.points}}},
      {"onshell",
       {{"c", c.onshell_c},
        {"restarts", c.restarts},
        {"z_re", c.z_re},
        {"z_im", c.z_im},
        {"q_step", c.q_step},
        {"kappas", c.kappas},
        {"twisted_cases", detail::pairs_json(c.twisted_cases)},
        {"chains", chains}}},
      {"bench", {{"cases", detail::pairs_json(c.bench_cases)}, {"repetitions", c.bench_repetitions}, {"threads", c.bench_threads}}},
      {"tolerances",
       {{"float", c.tol.float_eq},
        {"residual", c.tol.residual},
        {"certificate", c.tol.certificate},
        {"twisted", c.tol.twisted},
        {"form_factor", c.tol.form_factor},
        {"p_spread", c.tol.p_spread},
        {"q_kappa", c.tol.q_kappa}}},
  };
}

/// Renders the configuration back to TOML; parsing the result reproduces the
/// same canonical form.
inline std::string to_toml(const SuiteConfig& c) {
  std::ostringstream os;
  os.precision(17);
  auto q = [](const std::string& s) { return "\"" + s + "\""; };
  auto strs = [&](const std::vector<std::string>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + q(v[i]);
    return out + "]";
  };
  auto nums = [&](const auto& v) {
    std::ostringstream o;
    o.precision(17);
    o << "[";
    for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : "") << v[i];
    o << "]";
    return o.str();
  };
  auto dbl = [](double d) {
    std::ostringstream o;
    o.precision(17);
    o << d;
    std::string s = o.str();
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
  };
  auto dbls = [&](const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + dbl(v[i]);
    return out + "]";
  };
  auto pairs = [](const std::vector<std::pair<int, int>>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i)
      out += (i ? ", " : "") + std::string("[") + std::to_string(v[i].first) + ", " + std::to_string(v[i].second) + "]";
    return out + "]";
  };
  os << "seed = " << c.seed << "\nmode = " << q(c.mode) << "\nthreads = " << c.threads
     << "\nsuites = " << strs(c.suites) << "\n\n[chain]\nlengths = " << nums(c.lengths) << "\nc = " << q(c.c)
     << "\nxi = " << (c.xi.empty() ? q("random") : strs(c.xi)) << "\nkinds = " << strs(c.kinds)
     << "\n\n[caps]\na_max = " << c.a_max << "\nb_max = " << c.b_max << "\nn_max = " << c.n_max
     << "\naction_a_max = " << c.action_a_max << "\naction_b_max = " << c.action_b_max
     << "\nreshetikhin = " << pairs(c.reshetikhin_cases) << "\nresidues = " << pairs(c.residue_cases)
     << "\n\n[samples]\ndraws = " << c.draws << "\npoints = " << c.points << "\n\n[onshell]\nc = " << dbl(c.onshell_c)
     << "\nrestarts = " << c.restarts << "\nz_re = " << dbl(c.z_re) << "\nz_im = " << dbl(c.z_im)
     << "\nq_step = " << dbl(c.q_step) << "\nkappas = " << dbls(c.kappas)
     << "\ntwisted_cases = " << pairs(c.twisted_cases) << "\n";
  for (const auto& ch : c.onshell_chains)
    os << "\n[[onshell.chains]]\nxi = " << dbls(ch.xi) << "\nkinds = " << strs(ch.kinds) << "\ncases = " << pairs(ch.cases) << "\n";
  os << "\n[bench]\ncases = " << pairs(c.bench_cases) << "\nrepetitions = " << c.bench_repetitions
     << "\nthreads = " << c.bench_threads << "\n\n[tolerances]\nfloat = " << dbl(c.tol.float_eq)
     << "\nresidual = " << dbl(c.tol.residual) << "\ncertificate = " << dbl(c.tol.certificate)
     << "\ntwisted = " << dbl(c.tol.twisted) << "\nform_factor = " << dbl(c.tol.form_factor)
     << "\np_spread = " << dbl(c.tol.p_spread) << "\nq_kappa = " << dbl(c.tol.q_kappa) << "\n";
  return os.str();
}

}  // namespace bethe3::cli
