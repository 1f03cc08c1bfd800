#pragma once

// Suite orchestration: every suite turns the configuration into a list of
// pure jobs with pre-drawn parameters; a worker pool runs them and the
// records are assembled in job order, so the report does not depend on the
// thread count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bethe3/bethe3.hpp"
#include "config.hpp"
#include "report.hpp"

namespace bethe3::cli {

using nlohmann::json;

namespace detail {

inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (unsigned char ch : stream) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Rational draws n/d with |n| <= 60, 1 <= d <= 9, rejecting values whose
/// difference with anything already taken is 0, +-c or +-2c.
class Sampler {
 public:
  Sampler(std::uint64_t seed, std::string_view stream, Rational c)
      : rng_(stream_seed(seed, stream)), c_(std::move(c)) {}

  /// n fresh values avoiding `avoid` and each other.
  std::vector<Rational> draw(std::size_t n, const std::vector<Rational>& avoid = {}) {
    std::vector<Rational> taken = avoid, out;
    std::uniform_int_distribution<long> num(-60, 60), den(1, 9);
    const Rational c2 = c_ + c_;
    while (out.size() < n) {
      Rational r(num(rng_), den(rng_));
      bool ok = true;
      for (const auto& t : taken) {
        const Rational d = r - t;
        if (d.is_zero() || d == c_ || d == -c_ || d == c2 || d == -c2) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      taken.push_back(r);
      out.push_back(r);
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
  Rational c_;
};

template <FieldScalar T>
T lift(const Rational& r) {
  if constexpr (field_traits<T>::exact) return r;
  else return Complex(r.to_double(), 0.0);
}

template <FieldScalar T>
ParamSet<T> lift(const std::vector<Rational>& v, std::size_t from = 0, std::size_t count = std::size_t(-1)) {
  std::vector<T> out;
  for (std::size_t i = from; i < v.size() && i - from < count; ++i) out.push_back(lift<T>(v[i]));
  return ParamSet<T>(std::move(out));
}

template <FieldScalar T>
json values(const ParamSet<T>& s) {
  json a = json::array();
  for (const T& x : s) a.push_back(field_traits<T>::to_string(x));
  return a;
}

inline json values(const std::vector<Rational>& s) {
  json a = json::array();
  for (const auto& x : s) a.push_back(x.str());
  return a;
}

template <FieldScalar T>
json label_json(const BetheLabel<T>& l) {
  return {{"u", values(l.u)}, {"v", values(l.v)}};
}

struct ChainSpec {
  std::vector<Rational> xi;
  std::vector<SiteKind> kinds;
  Rational c;

  std::string kinds_string() const {
    std::string s;
    for (auto k : kinds) s += k == SiteKind::fundamental ? 'f' : 'd';
    return s;
  }
  json to_json() const { return {{"L", xi.size()}, {"xi", values(xi)}, {"kinds", kinds_string()}, {"c", c.str()}}; }
  ChainSpec fundamental() const {
    ChainSpec out = *this;
    out.kinds.assign(xi.size(), SiteKind::fundamental);
    return out;
  }
};

inline Rational parse_rational(const std::string& s, const std::string& what) {
  try {
    return Rational::parse(s);
  } catch (const std::exception&) {
    throw ConfigError(what + ": cannot parse \"" + s + "\" as a rational");
  }
}

inline ChainSpec chain_for(const SuiteConfig& cfg, int L) {
  ChainSpec spec;
  spec.c = parse_rational(cfg.c, "chain.c");
  if (spec.c.is_zero()) throw ConfigError("chain.c must be nonzero");
  const std::string& mode = cfg.kinds[0];
  for (int l = 0; l < L; ++l) {
    if (cfg.kinds.size() == 1 && mode == "alternating")
      spec.kinds.push_back(l % 2 == 0 ? SiteKind::fundamental : SiteKind::dual);
    else if (cfg.kinds.size() == 1 && mode == "fundamental")
      spec.kinds.push_back(SiteKind::fundamental);
    else
      spec.kinds.push_back(cfg.kinds[static_cast<std::size_t>(l)] == "f" ? SiteKind::fundamental : SiteKind::dual);
  }
  if (!cfg.xi.empty()) {
    for (const auto& s : cfg.xi) spec.xi.push_back(parse_rational(s, "chain.xi"));
    try {
      (void)ChainModel<Rational>(ParamSet<Rational>(spec.xi), spec.c, spec.kinds);
    } catch (const ModelError& e) {
      throw ConfigError(std::string("chain.xi: ") + e.what());
    }
  } else {
    Sampler s(cfg.seed, "chain/" + std::to_string(L), spec.c);
    spec.xi = s.draw(static_cast<std::size_t>(L));
  }
  return spec;
}

template <FieldScalar T>
ChainModel<T> build_model(const ChainSpec& spec) {
  return ChainModel<T>(lift<T>(spec.xi), lift<T>(spec.c), spec.kinds);
}

inline std::vector<SiteKind> parse_kinds(const std::vector<std::string>& k) {
  std::vector<SiteKind> out;
  for (const auto& s : k) out.push_back(s == "f" ? SiteKind::fundamental : SiteKind::dual);
  return out;
}

inline ChainModel<Complex> onshell_model(const SuiteConfig& cfg, const OnShellChain& ch) {
  std::vector<Complex> xi;
  for (double x : ch.xi) xi.emplace_back(x, 0.0);
  return ChainModel<Complex>(ParamSet<Complex>(std::move(xi)), Complex(cfg.onshell_c, 0.0), parse_kinds(ch.kinds));
}

inline json onshell_json(const SuiteConfig& cfg, const OnShellChain& ch) {
  std::string k;
  for (const auto& s : ch.kinds) k += s;
  return {{"L", ch.xi.size()}, {"xi", ch.xi}, {"kinds", k}, {"c", cfg.onshell_c}};
}

/// Outcome of one comparison: relative deviation and verdict.
struct Deviation {
  bool ok = true;
  double dev = 0;
  void merge(const Deviation& o) {
    ok = ok && o.ok;
    dev = std::max(dev, o.dev);
  }
};

template <FieldScalar T>
double max_magnitude(const Coords<T>& v) {
  double m = 0;
  for (const T& x : v) m = std::max(m, field_traits<T>::magnitude(x));
  return m;
}

/// Exact equality in rational mode, relative tolerance in float mode.
template <FieldScalar T>
Deviation compare(const Coords<T>& got, const Coords<T>& want, double tol) {
  const double scale = std::max(1.0, max_magnitude(want));
  const double diff = max_abs_diff(got, want) / scale;
  if constexpr (field_traits<T>::exact) return {got == want, diff};
  else return {diff <= tol, diff};
}

template <FieldScalar T>
Deviation compare(const T& got, const T& want, double tol) {
  const double scale = std::max(1.0, field_traits<T>::magnitude(want));
  const double diff = field_traits<T>::magnitude(got - want) / scale;
  if constexpr (field_traits<T>::exact) return {got == want, diff};
  else return {diff <= tol, diff};
}

template <FieldScalar T>
Deviation compare(const OperatorMatrix<T>& diff, double scale, double tol) {
  const double d = diff.max_abs() / std::max(1.0, scale);
  if constexpr (field_traits<T>::exact) return {diff.is_zero_operator(), d};
  else return {d <= tol, d};
}

/// Relative error against max(|want|, scale): on-shell comparisons are measured
/// against the natural size of the matrix element.
inline Deviation compare_scaled(const Complex& got, const Complex& want, double scale, double tol) {
  const double d = std::abs(got - want) / std::max({std::abs(want), scale, 1e-300});
  return {d <= tol, d};
}

inline CheckRecord record(std::string name, std::string anchor, json params, const Deviation& d) {
  CheckRecord r;
  r.name = std::move(name);
  r.anchor = std::move(anchor);
  r.params = std::move(params);
  r.status = d.ok ? Status::pass : Status::fail;
  r.max_deviation = d.dev;
  return r;
}

inline CheckRecord skipped(std::string name, std::string anchor, json params, std::string why) {
  CheckRecord r;
  r.name = std::move(name);
  r.anchor = std::move(anchor);
  r.params = std::move(params);
  r.status = Status::skip;
  r.max_deviation = 0;
  r.message = std::move(why);
  return r;
}

inline std::string ab(int a, int b) { return "a=" + std::to_string(a) + ",b=" + std::to_string(b); }

}  // namespace detail

/// A unit of work. `run` must be a pure function of captured values.
struct Job {
  std::string suite, name, anchor;
  json params;
  std::function<std::vector<CheckRecord>()> run;
  bool exclusive = false;  ///< run alone, after the pool (timing-sensitive)
};

namespace detail {

inline std::vector<CheckRecord> execute(const Job& job) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CheckRecord> out;
  try {
    out = job.run();
  } catch (const std::exception& e) {
    CheckRecord r;
    r.name = job.name;
    r.anchor = job.anchor;
    r.params = job.params;
    r.status = Status::fail;
    r.max_deviation = std::numeric_limits<double>::infinity();
    r.message = std::string("exception: ") + e.what();
    out = {r};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (auto& r : out) {
    r.suite = job.suite;
    if (r.anchor.empty()) r.anchor = job.anchor;
    if (r.wall_time_s < 0) r.wall_time_s = dt / static_cast<double>(out.size());
  }
  return out;
}

}  // namespace detail

/// Runs the jobs on `threads` workers; records come back in job order.
inline std::vector<CheckRecord> run_jobs(const std::vector<Job>& jobs, unsigned threads) {
  std::vector<std::vector<CheckRecord>> results(jobs.size());
  std::vector<std::size_t> pooled, exclusive;
  for (std::size_t i = 0; i < jobs.size(); ++i) (jobs[i].exclusive ? exclusive : pooled).push_back(i);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < pooled.size();) results[pooled[k]] = detail::execute(jobs[pooled[k]]);
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(pooled.size())));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nt; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i : exclusive) results[i] = detail::execute(jobs[i]);
  std::vector<CheckRecord> out;
  for (auto& r : results)
    for (auto& x : r) out.push_back(std::move(x));
  return out;
}

namespace suites {

using namespace bethe3::cli::detail;

// ---------------------------------------------------------------------------
// Algebraic layer

template <FieldScalar T>
void ybe_rtt(const SuiteConfig& cfg, const std::vector<ChainSpec>& chains, std::vector<Job>& jobs) {
  const std::string suite = "ybe-rtt";
  const double tol = cfg.tol.float_eq;
  const Rational c = parse_rational(cfg.c, "chain.c");
  Sampler ys(cfg.seed, "ybe-rtt/ybe", c);
  for (int p = 0; p < cfg.points; ++p) {
    const auto xs = ys.draw(3);
    json params = {{"x", xs[0].str()}, {"y", xs[1].str()}, {"z", xs[2].str()}, {"c", c.str()}, {"point", p}};
    jobs.push_back({suite, "ybe/point=" + std::to_string(p), "Yang-Baxter equation", params, [=] {
                      const RateKernel<T> k(lift<T>(c));
                      const T x = lift<T>(xs[0]), y = lift<T>(xs[1]), z = lift<T>(xs[2]);
                      const Matrix<T> I3 = Matrix<T>::identity(3);
                      Matrix<T> P(9, 9);
                      for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b) P(3 * a + b, 3 * b + a) = from_int<T>(1);
                      const Matrix<T> P23 = kron(I3, P);
                      const Matrix<T> R12 = kron(build_r_matrix(k, x, y), I3);
                      const Matrix<T> R13 = P23 * kron(build_r_matrix(k, x, z), I3) * P23;
                      const Matrix<T> R23 = kron(I3, build_r_matrix(k, y, z));
                      const Matrix<T> d = R12 * R13 * R23 - R23 * R13 * R12;
                      Deviation dv;
                      dv.dev = d.max_abs();
                      if constexpr (field_traits<T>::exact) dv.ok = d.is_zero_matrix();
                      else dv.ok = dv.dev <= tol;
                      return std::vector{record("ybe/point=" + std::to_string(p), "", params, dv)};
                    }});
  }
  for (const auto& spec : chains) {
    const std::string L = std::to_string(spec.xi.size());
    Sampler s(cfg.seed, "ybe-rtt/L=" + L, c);
    jobs.push_back({suite, "vacuum/L=" + L, "vacuum eigenvalues", spec.to_json(), [=] {
                      const auto model = build_model<T>(spec);
                      vacuum_weights(model, tol);
                      return std::vector{record("vacuum/L=" + L, "", spec.to_json(), Deviation{})};
                    }});
    for (int p = 0; p < cfg.points; ++p) {
      const auto xy = s.draw(2, spec.xi);
      json params = spec.to_json();
      params["x"] = xy[0].str();
      params["y"] = xy[1].str();
      const std::string tag = "/L=" + L + "/point=" + std::to_string(p);
      jobs.push_back({suite, "rtt" + tag, "RTT relation", params, [=] {
                        const auto model = build_model<T>(spec);
                        const T x = lift<T>(xy[0]), y = lift<T>(xy[1]);
                        const T g = model.kernel().g(x, y);
                        std::vector<OperatorMatrix<T>> Tx, Ty;
                        for (int i = 1; i <= 3; ++i)
                          for (int j = 1; j <= 3; ++j) {
                            Tx.push_back(monodromy_entry(model, i, j, x));
                            Ty.push_back(monodromy_entry(model, i, j, y));
                          }
                        auto at = [](const std::vector<OperatorMatrix<T>>& m, int i, int j) -> const OperatorMatrix<T>& {
                          return m[static_cast<std::size_t>(3 * (i - 1) + (j - 1))];
                        };
                        // [T_ik(x) T_jl(y) + g T_jk(x) T_il(y)] - [T_jl(y) T_ik(x) + g T_jk(y) T_il(x)]
                        Deviation dv;
                        for (int i = 1; i <= 3; ++i)
                          for (int j = 1; j <= 3; ++j)
                            for (int k = 1; k <= 3; ++k)
                              for (int l = 1; l <= 3; ++l) {
                                const auto lhs = at(Tx, i, k) * at(Ty, j, l) + g * (at(Tx, j, k) * at(Ty, i, l));
                                const auto rhs = at(Ty, j, l) * at(Tx, i, k) + g * (at(Ty, j, k) * at(Tx, i, l));
                                dv.merge(compare(lhs - rhs, lhs.max_abs(), tol));
                              }
                        return std::vector{record("rtt" + tag, "", params, dv)};
                      }});
      jobs.push_back({suite, "commuting-transfer" + tag, "transfer matrix commutativity", params, [=] {
                        const auto model = build_model<T>(spec);
                        const T x = lift<T>(xy[0]), y = lift<T>(xy[1]);
                        Deviation dv;
                        for (const auto& tw : {TwistVector<T>::untwisted(),
                                               TwistVector<T>{from_int<T>(2), field_traits<T>::from_fraction(2, 3),
                                                              field_traits<T>::from_fraction(-5, 4)}}) {
                          const auto tx = transfer_matrix(model, x, tw), ty = transfer_matrix(model, y, tw);
                          dv.merge(compare(commutator(tx, ty), (tx * ty).max_abs(), tol));
                        }
                        return std::vector{record("commuting-transfer" + tag, "", params, dv)};
                      }});
    }
    const ChainSpec fund = spec.fundamental();
    if (spec.xi.size() <= 3) {
      jobs.push_back({suite, "local-operator/L=" + L, "quantum inverse scattering", fund.to_json(), [=] {
                        const auto model = build_model<T>(fund);
                        Deviation dv;
                        for (std::size_t site = 0; site < model.length(); ++site)
                          for (int i = 1; i <= 3; ++i)
                            for (int j = 1; j <= 3; ++j)
                              dv.merge(compare(local_operator(model, site, i, j) -
                                                   elementary_at_site<T>(model.length(), site, i, j),
                                               1.0, tol));
                        return std::vector{record("local-operator/L=" + L, "", fund.to_json(), dv)};
                      }});
    }
  }
}

// ---------------------------------------------------------------------------
// Bethe vectors and actions

template <FieldScalar T>
void bethe_equivalence(const SuiteConfig& cfg, const std::vector<ChainSpec>& chains, std::vector<Job>& jobs) {
  const std::string suite = "bethe-equivalence";
  const double tol = cfg.tol.float_eq;
  for (const auto& spec : chains) {
    const std::string L = std::to_string(spec.xi.size());
    Sampler s(cfg.seed, suite + "/L=" + L, spec.c);
    jobs.push_back({suite, "vacuum-state/L=" + L, "Bethe vector normalization", spec.to_json(), [=] {
                      const auto model = build_model<T>(spec);
                      Deviation dv;
                      for (auto var : kAllVariants)
                        dv.merge(compare(build_bethe_vector(model, BetheLabel<T>{}, var, 1).coords, model.vacuum(), tol));
                      return std::vector{record("vacuum-state/L=" + L, "", spec.to_json(), dv)};
                    }});
    for (int a = 0; a <= cfg.a_max; ++a)
      for (int b = 0; b <= cfg.b_max; ++b)
        for (int d = 0; d < cfg.draws; ++d) {
          const auto vals = s.draw(static_cast<std::size_t>(a + b), spec.xi);
          const BetheLabel<T> label{lift<T>(vals, 0, a), lift<T>(vals, a)};
          const std::string name = "variants/L=" + L + "/" + ab(a, b) + "/draw=" + std::to_string(d);
          json params = spec.to_json();
          params["label"] = label_json(label);
          jobs.push_back({suite, name, "explicit formulas and recursions", params, [=] {
                            const auto model = build_model<T>(spec);
                            const auto ref = build_bethe_vector(model, label, BetheVariant::explicit1, 1);
                            Deviation dv;
                            for (auto var : kAllVariants)
                              dv.merge(compare(build_bethe_vector(model, label, var, 1).coords, ref.coords, tol));
                            json p = params;
                            p["representation_too_small"] = ref.representation_too_small;
                            return std::vector{record(name, "", p, dv)};
                          }});
        }
  }
}

template <FieldScalar T>
void actions(const SuiteConfig& cfg, const std::vector<ChainSpec>& chains, std::vector<Job>& jobs) {
  const std::string suite = "actions";
  const double tol = cfg.tol.float_eq;
  for (const auto& spec : chains) {
    const std::string L = std::to_string(spec.xi.size());
    Sampler s(cfg.seed, suite + "/L=" + L, spec.c);
    for (ActionKind kind : {ActionKind::T13, ActionKind::T12, ActionKind::T23})
      for (int n = 1; n <= cfg.n_max; ++n)
        for (int a = 0; a <= cfg.action_a_max; ++a)
          for (int b = 0; b <= cfg.action_b_max; ++b)
            for (int d = 0; d < cfg.draws; ++d) {
              const auto vals = s.draw(static_cast<std::size_t>(a + b + n), spec.xi);
              const BetheLabel<T> base{lift<T>(vals, 0, a), lift<T>(vals, a, b)};
              const ParamSet<T> x = lift<T>(vals, a + b);
              const std::string name = std::string(to_string(kind)) + "/L=" + L + "/n=" + std::to_string(n) + "/" +
                                       ab(a, b) + "/draw=" + std::to_string(d);
              json params = spec.to_json();
              params["label"] = label_json(base);
              params["x"] = values(x);
              jobs.push_back({suite, name, std::string("multiple action of ") + to_string(kind), params, [=] {
                                const auto model = build_model<T>(spec);
                                const auto sum = multiple_action(kind, x, base, model);
                                const auto want =
                                    apply_action_oracle(kind, x, model, build_bethe_vector(model, base, BetheVariant::explicit1, 1).coords);
                                return std::vector{record(name, "", params, compare(materialize(sum, model), want, tol))};
                              }});
            }
  }
}

// ---------------------------------------------------------------------------
// Scalar products and highest coefficients

template <FieldScalar T>
void reshetikhin(const SuiteConfig& cfg, const std::vector<ChainSpec>& chains, std::vector<Job>& jobs) {
  const std::string suite = "reshetikhin";
  const double tol = cfg.tol.float_eq;
  for (const auto& spec : chains) {
    const std::string L = std::to_string(spec.xi.size());
    Sampler s(cfg.seed, suite + "/L=" + L, spec.c);
    for (const auto& [a, b] : cfg.reshetikhin_cases)
      for (int d = 0; d < cfg.draws; ++d) {
        const auto vals = s.draw(static_cast<std::size_t>(2 * a + 2 * b), spec.xi);
        const BetheLabel<T> C{lift<T>(vals, 0, a), lift<T>(vals, a, b)};
        const BetheLabel<T> B{lift<T>(vals, a + b, a), lift<T>(vals, 2 * a + b)};
        const std::string name = "scalar-product/L=" + L + "/" + ab(a, b) + "/draw=" + std::to_string(d);
        json params = spec.to_json();
        params["C"] = label_json(C);
        params["B"] = label_json(B);
        jobs.push_back({suite, name, "Reshetikhin sum", params, [=] {
                          const auto model = build_model<T>(spec);
                          return std::vector{record(name, "", params,
                                                    compare(reshetikhin_scalar_product(model, C, B, 1),
                                                            oracle_scalar_product(model, C, B), tol))};
                        }});
      }
  }
}

template <FieldScalar T>
HighestCoeffArgs<T> z_args(const std::vector<Rational>& vals, int a, int b) {
  return {lift<T>(vals, 0, a), lift<T>(vals, a, a), lift<T>(vals, 2 * a, b), lift<T>(vals, 2 * a + b, b)};
}

template <FieldScalar T>
json z_json(const HighestCoeffArgs<T>& z) {
  return {{"t", values(z.t)}, {"x", values(z.x)}, {"s", values(z.s)}, {"y", values(z.y)}};
}

template <FieldScalar T>
void highest_coeff(const SuiteConfig& cfg, std::vector<Job>& jobs) {
  const std::string suite = "highest-coeff";
  const double tol = cfg.tol.float_eq;
  const Rational c = parse_rational(cfg.c, "chain.c");
  Sampler s(cfg.seed, suite, c);
  for (int a = 0; a <= cfg.a_max; ++a)
    for (int b = 0; b <= cfg.b_max; ++b)
      for (int d = 0; d < cfg.draws; ++d) {
        const auto vals = s.draw(static_cast<std::size_t>(2 * a + 2 * b));
        const auto args = z_args<T>(vals, a, b);
        const std::string name = "sum-representations/" + ab(a, b) + "/draw=" + std::to_string(d);
        json params = z_json(args);
        params["c"] = c.str();
        jobs.push_back({suite, name, "highest coefficient partition sums", params, [=] {
                          const RateKernel<T> k(lift<T>(c));
                          return std::vector{record(name, "", params,
                                                    compare(highest_coefficient(k, args, ZStrategy::sumEta),
                                                            highest_coefficient(k, args, ZStrategy::sumW), tol))};
                        }});
      }
  const int nmax = std::max(cfg.a_max, cfg.b_max);
  for (int n = 1; n <= nmax; ++n)
    for (int d = 0; d < cfg.draws; ++d) {
      const auto vals = s.draw(static_cast<std::size_t>(2 * n));
      const ParamSet<T> p = lift<T>(vals, 0, n), q = lift<T>(vals, n, n);
      json params = {{"first", values(p)}, {"second", values(q)}, {"c", c.str()}};
      const std::string tag = "/n=" + std::to_string(n) + "/draw=" + std::to_string(d);
      if (n <= cfg.a_max)
        jobs.push_back({suite, "boundary-a" + tag, "highest coefficient boundary values", params, [=] {
                          const RateKernel<T> k(lift<T>(c));
                          const HighestCoeffArgs<T> z{p, q, {}, {}};
                          return std::vector{record("boundary-a" + tag, "", params,
                                                    compare(highest_coefficient(k, z), ik_determinant(k, q, p), tol))};
                        }});
      if (n <= cfg.b_max)
        jobs.push_back({suite, "boundary-b" + tag, "highest coefficient boundary values", params, [=] {
                          const RateKernel<T> k(lift<T>(c));
                          const HighestCoeffArgs<T> z{{}, {}, p, q};
                          return std::vector{record("boundary-b" + tag, "", params,
                                                    compare(highest_coefficient(k, z), ik_determinant(k, q, p), tol))};
                        }});
    }
}

template <FieldScalar T>
void contour(const SuiteConfig& cfg, std::vector<Job>& jobs) {
  const std::string suite = "contour";
  const Rational c = parse_rational(cfg.c, "chain.c");
  Sampler s(cfg.seed, suite, c);
  for (int a = 0; a <= cfg.a_max; ++a)
    for (int b = 0; b <= cfg.b_max; ++b)
      for (int d = 0; d < cfg.draws; ++d) {
        const auto vals = s.draw(static_cast<std::size_t>(2 * a + 2 * b));
        const auto args = z_args<Rational>(vals, a, b);
        const std::string name = "contour-vs-sum/" + ab(a, b) + "/draw=" + std::to_string(d);
        json params = z_json(args);
        params["c"] = c.str();
        if constexpr (!field_traits<T>::exact) {
          jobs.push_back({suite, name, "contour integral by residues", params, [=] {
                            return std::vector{skipped(name, "", params, "the residue evaluation is exact-mode only")};
                          }});
        } else {
          jobs.push_back({suite, name, "contour integral by residues", params, [=] {
                            const RateKernel<Rational> k(c);
                            return std::vector{record(name, "", params,
                                                      compare(highest_coefficient(k, args, ZStrategy::contour),
                                                              highest_coefficient(k, args, ZStrategy::sumW), 0.0))};
                          }});
        }
      }
}

template <FieldScalar T>
void residues(const SuiteConfig& cfg, std::vector<Job>& jobs) {
  const std::string suite = "residues";
  const Rational c = parse_rational(cfg.c, "chain.c");
  Sampler s(cfg.seed, suite, c);
  for (const auto& [a, b] : cfg.residue_cases)
    for (int d = 0; d < cfg.draws; ++d) {
      const auto vals = s.draw(static_cast<std::size_t>(2 * a + 2 * b));
      const auto args = z_args<Rational>(vals, a, b);
      for (ResiduePole pole : {ResiduePole::at_y, ResiduePole::at_t}) {
        const std::string name = std::string("residue-") + to_string(pole) + "/" + ab(a, b) + "/draw=" + std::to_string(d);
        json params = z_json(args);
        params["c"] = c.str();
        if constexpr (!field_traits<T>::exact) {
          jobs.push_back({suite, name, "highest coefficient residue recursion", params, [=] {
                            return std::vector{skipped(name, "", params, "residue extraction is exact-mode only")};
                          }});
        } else {
          const bool applicable = b >= 1 && (pole == ResiduePole::at_y || a >= 1);
          jobs.push_back({suite, name, "highest coefficient residue recursion", params, [=] {
                            if (!applicable)
                              return std::vector{skipped(name, "", params, "pole needs a nonempty parameter set")};
                            const RateKernel<Rational> k(c);
                            return std::vector{record(name, "", params,
                                                      compare(highest_coeff_residue(k, args, pole),
                                                              highest_coeff_residue_formula(k, args, pole), 0.0))};
                          }});
        }
      }
    }
}

// ---------------------------------------------------------------------------
// On-shell suites (always floating point)

inline SolverOptions solver_options(const SuiteConfig& cfg, std::string_view stream) {
  SolverOptions o;
  o.restarts = cfg.restarts;
  o.tolerance = cfg.tol.residual;
  o.certificate_tolerance = cfg.tol.certificate;
  o.seed = stream_seed(cfg.seed, stream);
  return o;
}

/// A second on-shell state with roots and eigenvalue distinct from B.
inline std::optional<BaeSolution> find_partner(const ChainModel<Complex>& model, const BaeSolution& B,
                                               SolverOptions opt, const Complex& z) {
  const std::size_t a = B.label.a(), b = B.label.b();
  const std::uint64_t base = opt.seed;
  for (std::uint64_t k = 1; k <= 40; ++k) {
    opt.seed = base + 7919 * k;
    BaeSolution C;
    try {
      C = solve_bae(model, a, b, {}, opt);
    } catch (const NoConvergence&) {
      continue;
    }
    double dmin = 1e300;
    for (const auto& x : C.label.u)
      for (const auto& y : B.label.u) dmin = std::min(dmin, std::abs(x - y));
    for (const auto& x : C.label.v)
      for (const auto& y : B.label.v) dmin = std::min(dmin, std::abs(x - y));
    if (dmin > 1e-4 &&
        std::abs(transfer_eigenvalue(model, z, C.label) - transfer_eigenvalue(model, z, B.label)) > 1e-6)
      return C;
  }
  return std::nullopt;
}

inline json roots_json(const BaeSolution& s) {
  json r = label_json(s.label);
  r["branch_l"] = s.branch.ell;
  r["branch_m"] = s.branch.m;
  return r;
}

inline std::string case_tag(std::size_t chain, int a, int b) {
  return "/chain=" + std::to_string(chain) + "/" + ab(a, b);
}

inline void bae(const SuiteConfig& cfg, std::vector<Job>& jobs) {
  const std::string suite = "bae";
  const Complex z(cfg.z_re, cfg.z_im);
  for (std::size_t ci = 0; ci < cfg.onshell_chains.size(); ++ci) {
    const OnShellChain ch = cfg.onshell_chains[ci];
    for (const auto& [a, b] : ch.cases) {
      const std::string tag = case_tag(ci, a, b);
      const SolverOptions opt = solver_options(cfg, suite + tag);
      json params = onshell_json(cfg, ch);
      params["a"] = a;
      params["b"] = b;
      params["solver_seed"] = opt.seed;
      const Tolerances tol = cfg.tol;
      jobs.push_back({suite, "solve" + tag, "Bethe equations", params, [=] {
                        const auto model = onshell_model(cfg, ch);
                        const BaeSolution B = solve_bae(model, a, b, {}, opt);
                        json p = params;
                        p["roots"] = roots_json(B);
                        p["attempts"] = B.attempts;
                        std::vector<CheckRecord> out;
                        out.push_back(record("residual" + tag, "logarithmic Bethe equations", p,
                                             {B.residual <= tol.residual, B.residual}));
                        out.push_back(record("certificate" + tag, "transfer matrix eigenvector", p,
                                             {B.certificate <= tol.certificate, B.certificate}));
                        double prod = 0;
                        for (const auto& r : bae_product_residuals(model, B.label)) prod = std::max(prod, std::abs(r));
                        out.push_back(record("product-form" + tag, "Bethe equations", p, {prod <= tol.certificate, prod}));
                        const double part = bae_partition_form_defect(model, B.label);
                        out.push_back(record("partition-form" + tag, "Bethe equations", p, {part <= tol.certificate, part}));
                        const auto C = find_partner(model, B, opt, z);
                        if (!C) {
                          out.push_back(skipped("orthogonality" + tag, "on-shell orthogonality", p,
                                                "no second on-shell state found in this sector"));
                        } else {
                          p["partner"] = roots_json(*C);
                          const auto cv = build_dual_bethe_vector(model, C->label).coords;
                          const auto bv = build_bethe_vector(model, B.label).coords;
                          const double d = std::abs(dot(cv, bv)) / std::max(1e-300, norm2(cv) * norm2(bv));
                          out.push_back(record("orthogonality" + tag, "on-shell orthogonality", p, {d <= tol.form_factor, d}));
                        }
                        return out;
                      }});
    }
  }
  json hp = {{"L", 2}, {"xi", {0.0, 0.0}}, {"kinds", "ff"}, {"c", cfg.onshell_c}, {"a", 1}, {"b", 0}};
  const SolverOptions opt = solver_options(cfg, "bae/homogeneous");
  jobs.push_back({suite, "homogeneous-root", "canonical homogeneous root", hp, [=] {
                    const ChainModel<Complex> model(ParamSet<Complex>{Complex(0), Complex(0)}, Complex(cfg.onshell_c), {}, true);
                    const BaeSolution s = solve_bae(model, 1, 0, {}, opt);
                    const double d = std::abs(s.label.u[0] + cfg.onshell_c / 2);
                    json p = hp;
                    p["roots"] = roots_json(s);
                    return std::vector{record("homogeneous-root", "", p, {d <= 1e-12, d})};
                  }});
}

inline void twisted_det(const SuiteConfig& cfg, std::vector<Job>& jobs) {
  const std::string suite = "twisted-det";
  for (std::size_t ci = 0; ci < cfg.onshell_chains.size(); ++ci) {
    const OnShellChain ch = cfg.onshell_chains[ci];
    for (const auto& [a, b] : ch.cases) {
      if (std::find(cfg.twisted_cases.begin(), cfg.twisted_cases.end(), std::pair{a, b}) == cfg.twisted_cases.end())
        continue;
      for (double kappa : cfg.kappas) {
        std::ostringstream ks;
        ks << kappa;
        const std::string tag = case_tag(ci, a, b) + "/kappa=" + ks.str();
        const SolverOptions optB = solver_options(cfg, "onshell" + case_tag(ci, a, b));
        const SolverOptions optC = solver_options(cfg, suite + tag);
        json params = onshell_json(cfg, ch);
        params["a"] = a;
        params["b"] = b;
        params["kappa"] = kappa;
        const double tol = cfg.tol.twisted;
        jobs.push_back({suite, "determinant" + tag, "twisted scalar product determinant", params, [=] {
                          const auto model = onshell_model(cfg, ch);
                          const BaeSolution B = solve_bae(model, a, b, {}, optB);
                          const BaeSolution C = solve_bae(model, a, b, TwistVector<Complex>::scalar(kappa), optC);
                          json p = params;
                          p["B"] = roots_json(B);
                          p["C"] = roots_json(C);
                          const auto cv = build_dual_bethe_vector(model, C.label).coords;
                          const auto bv = build_bethe_vector(model, B.label).coords;
                          const Complex want = dot(cv, bv);
                          const Complex got = twisted_scalar_product_det(model, C.label, B.label, Complex(kappa));
                          return std::vector{record("determinant" + tag, "", p,
                                                    compare_scaled(got, want, norm2(cv) * norm2(bv), tol))};
                        }});
      }
    }
  }
}

inline void form_factors(const SuiteConfig& cfg, std::vector<Job>& jobs) {
  const std::string suite = "form-factors";
  const Complex z(cfg.z_re, cfg.z_im);
  for (std::size_t ci = 0; ci < cfg.onshell_chains.size(); ++ci) {
    const OnShellChain ch = cfg.onshell_chains[ci];
    for (const auto& [a, b] : ch.cases) {
      const std::string tag = case_tag(ci, a, b);
      const SolverOptions opt = solver_options(cfg, "onshell" + tag);
      json params = onshell_json(cfg, ch);
      params["a"] = a;
      params["b"] = b;
      params["z"] = {cfg.z_re, cfg.z_im};
      const Tolerances tol = cfg.tol;
      const double step = cfg.q_step;
      jobs.push_back({suite, "same-state" + tag, "same-state form factor determinant", params, [=] {
                        const auto model = onshell_model(cfg, ch);
                        const BaeSolution B = solve_bae(model, a, b, {}, opt);
                        json p = params;
                        p["B"] = roots_json(B);
                        const auto cv = build_dual_bethe_vector(model, B.label).coords;
                        const auto bv = build_bethe_vector(model, B.label).coords;
                        std::vector<CheckRecord> out;
                        Deviation ff, qk;
                        Complex total = 0;
                        double total_scale = 0;
                        for (int s = 1; s <= 3; ++s) {
                          const Complex want = dot(cv, model.apply(s, s, z, bv));
                          const double scale = norm2(cv) * norm2(model.apply(s, s, z, bv));
                          const Complex got = form_factor_same_state(model, B, s, z);
                          ff.merge(compare_scaled(got, want, scale, tol.form_factor));
                          total += got;
                          total_scale = std::max(total_scale, scale);
                          const Complex q = q_kappa_cross_check(model, B, s, z, std::nullopt, step, ScalarRoute::automatic, opt);
                          qk.merge(compare_scaled(q, want, scale, tol.q_kappa));
                        }
                        out.push_back(record("same-state" + tag, "", p, ff));
                        const Complex rule = transfer_eigenvalue(model, z, B.label) * dot(cv, bv);
                        out.push_back(record("same-state-trace" + tag, "trace sum rule", p,
                                             compare_scaled(total, rule, total_scale, tol.form_factor)));
                        out.push_back(record("same-state-q-kappa" + tag, "kappa derivative of the twisted scalar product", p, qk));
                        return out;
                      }});
      jobs.push_back({suite, "distinct-states" + tag, "distinct-state form factor determinant", params, [=] {
                        const auto model = onshell_model(cfg, ch);
                        const BaeSolution B = solve_bae(model, a, b, {}, opt);
                        json p = params;
                        p["B"] = roots_json(B);
                        const auto C = find_partner(model, B, opt, z);
                        if (!C) {
                          const std::string why = "no second on-shell state found in this sector";
                          return std::vector{skipped("distinct-states" + tag, "", p, why),
                                             skipped("distinct-p-spread" + tag, "p-independence", p, why),
                                             skipped("distinct-trace" + tag, "trace sum rule", p, why),
                                             skipped("distinct-q-kappa" + tag, "kappa derivative of the twisted scalar product", p, why)};
                        }
                        p["C"] = roots_json(*C);
                        const auto cv = build_dual_bethe_vector(model, C->label).coords;
                        const auto bv = build_bethe_vector(model, B.label).coords;
                        Deviation ff, spread, qk;
                        Complex total = 0;
                        double total_scale = 0;
                        const std::size_t n = B.label.a() + B.label.b();
                        for (int s = 1; s <= 3; ++s) {
                          const auto tb = model.apply(s, s, z, bv);
                          const Complex want = dot(cv, tb);
                          const double scale = norm2(cv) * norm2(tb);
                          std::vector<Complex> byp;
                          for (std::size_t pp = 0; pp < n; ++pp) {
                            const Complex got = form_factor_distinct_states(model, *C, B, s, z, pp);
                            ff.merge(compare_scaled(got, want, scale, tol.form_factor));
                            byp.push_back(got);
                          }
                          double mag = scale;
                          for (const auto& v : byp) mag = std::max(mag, std::abs(v));
                          for (const auto& v : byp) {
                            const double d = std::abs(v - byp[0]) / std::max(mag, 1e-300);
                            spread.merge({d <= tol.p_spread, d});
                          }
                          total += byp[0];
                          total_scale = std::max(total_scale, scale);
                          const Complex q = q_kappa_cross_check(model, B, s, z, *C, step, ScalarRoute::automatic, opt);
                          qk.merge(compare_scaled(q, want, scale, tol.q_kappa));
                        }
                        const double tr = std::abs(total) / std::max(total_scale, 1e-300);
                        return std::vector{record("distinct-states" + tag, "", p, ff),
                                           record("distinct-p-spread" + tag, "p-independence", p, spread),
                                           record("distinct-trace" + tag, "trace sum rule", p, {tr <= tol.form_factor, tr}),
                                           record("distinct-q-kappa" + tag, "kappa derivative of the twisted scalar product", p, qk)};
                      }});
    }
  }
}

// ---------------------------------------------------------------------------
// Benchmark

/// Timing record of Reshetikhin's sum: measured term count, serial and
/// parallel wall time, speedup. Passes when the count equals C(2a,a) C(2b,b)
/// and both runs give bitwise equal values.
inline CheckRecord bench_partition_sum(const ChainModel<Complex>& model, const BetheLabel<Complex>& C,
                                       const BetheLabel<Complex>& B, int repetitions, unsigned threads) {
  const std::size_t a = B.a(), b = B.b();
  const std::size_t expected = binomial(2 * a, a) * binomial(2 * b, b);
  double serial = 1e300, parallel = 1e300;
  ReshetikhinResult<Complex> rs, rp;
  for (int r = 0; r < std::max(1, repetitions); ++r) {
    auto t0 = std::chrono::steady_clock::now();
    rs = reshetikhin_sum_counted(model, C, B, 1);
    auto t1 = std::chrono::steady_clock::now();
    rp = reshetikhin_sum_counted(model, C, B, threads);
    auto t2 = std::chrono::steady_clock::now();
    serial = std::min(serial, std::chrono::duration<double>(t1 - t0).count());
    parallel = std::min(parallel, std::chrono::duration<double>(t2 - t1).count());
  }
  CheckRecord r;
  r.name = "terms/" + ab(static_cast<int>(a), static_cast<int>(b));
  r.anchor = "Reshetikhin sum term count";
  r.params = {{"a", a}, {"b", b}, {"expected_terms", expected}, {"terms_serial", rs.terms}, {"terms_parallel", rp.terms}};
  const bool same = rs.value == rp.value;
  r.status = (rs.terms == expected && rp.terms == expected && same) ? Status::pass : Status::fail;
  r.max_deviation = std::abs(rs.value - rp.value);
  r.timing = {{"serial_s", serial}, {"parallel_s", parallel}, {"threads", threads},
              {"speedup", parallel > 0 ? serial / parallel : 0.0}};
  return r;
}

inline void bench(const SuiteConfig& cfg, std::vector<Job>& jobs) {
  const std::string suite = "bench";
  const OnShellChain ch = cfg.onshell_chains.empty()
                              ? OnShellChain{{0.3, -0.45, 1.1, 0.25, 0.8}, {"f", "f", "d", "d", "f"}, {}}
                              : cfg.onshell_chains[0];
  Sampler s(cfg.seed, suite, Rational(1));
  for (const auto& [a, b] : cfg.bench_cases) {
    const auto vals = s.draw(static_cast<std::size_t>(2 * a + 2 * b));
    const BetheLabel<Complex> C{lift<Complex>(vals, 0, a), lift<Complex>(vals, a, b)};
    const BetheLabel<Complex> B{lift<Complex>(vals, a + b, a), lift<Complex>(vals, 2 * a + b)};
    json params = onshell_json(cfg, ch);
    params["C"] = label_json(C);
    params["B"] = label_json(B);
    const int reps = cfg.bench_repetitions;
    const unsigned threads = cfg.bench_threads;
    Job job{suite, "terms/" + ab(a, b), "Reshetikhin sum term count", params, [=] {
              CheckRecord r = bench_partition_sum(onshell_model(cfg, ch), C, B, reps, threads);
              for (auto it = params.begin(); it != params.end(); ++it) r.params[it.key()] = it.value();
              return std::vector{r};
            }};
    job.exclusive = true;
    jobs.push_back(std::move(job));
  }
}

template <FieldScalar T>
void add_suite(const std::string& name, const SuiteConfig& cfg, const std::vector<ChainSpec>& chains,
               std::vector<Job>& jobs) {
  if (name == "ybe-rtt") ybe_rtt<T>(cfg, chains, jobs);
  else if (name == "bethe-equivalence") bethe_equivalence<T>(cfg, chains, jobs);
  else if (name == "actions") actions<T>(cfg, chains, jobs);
  else if (name == "reshetikhin") reshetikhin<T>(cfg, chains, jobs);
  else if (name == "highest-coeff") highest_coeff<T>(cfg, jobs);
  else if (name == "contour") contour<T>(cfg, jobs);
  else if (name == "residues") residues<T>(cfg, jobs);
  else if (name == "bae") bae(cfg, jobs);
  else if (name == "twisted-det") twisted_det(cfg, jobs);
  else if (name == "form-factors") form_factors(cfg, jobs);
  else if (name == "bench") bench(cfg, jobs);
  else throw ConfigError("unknown suite \"" + name + "\"");
}

}  // namespace suites

/// All jobs for a configuration, in report order. Throws ConfigError.
inline std::vector<Job> plan(const SuiteConfig& cfg) {
  validate(cfg);
  std::vector<detail::ChainSpec> chains;
  for (int L : cfg.lengths) chains.push_back(detail::chain_for(cfg, L));
  for (const auto& ch : cfg.onshell_chains) {
    try {
      detail::onshell_model(cfg, ch);
    } catch (const ModelError& e) {
      throw ConfigError(std::string("onshell chain: ") + e.what());
    }
  }
  std::vector<Job> jobs;
  for (const auto& name : cfg.suites) {
    if (cfg.mode == "rational") suites::add_suite<Rational>(name, cfg, chains, jobs);
    else suites::add_suite<Complex>(name, cfg, chains, jobs);
  }
  return jobs;
}

inline Report run_suite(const SuiteConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto jobs = plan(cfg);
  Report rep;
  rep.config = canonical_json(cfg);
  rep.version = kVersion;
  rep.threads = cfg.threads;
  rep.records = run_jobs(jobs, cfg.threads);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace bethe3::cli
