#include "openq/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "openq/bethe.hpp"
#include "openq/identities.hpp"
#include "openq/report.hpp"
#include "openq/verify.hpp"

namespace openq {
namespace {

struct Options {
  int sites = 2;
  std::string spin = "1";
  std::string p = "37/4";
  std::string q = "29/4";
  std::string backend;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string config;
  std::string csv;
  std::string output;
  bool timing = false;

  std::vector<std::string> xs;
  std::string y = "2/5";
  std::vector<std::size_t> cutoffs;
  int magnons = -1;
  std::vector<std::string> relations;
  int points = 20;
  std::size_t cutoff = 6;
  std::size_t trace_cutoff = 32;
  double tolerance = -1.0;
  int starts = 64;
  bool all_solutions = false;
  std::size_t terms = 100000;
  std::string summation = "plain";
  int max_n = 6;
};

const std::vector<std::string> kDefaultSamplePoints{"1/3", "2/5", "-3/7", "5/11", "7/13"};

// "1/2" and "3/2" name the spin; a bare integer is 2s.
int parse_twice_spin(const std::string& text) {
  if (text.find('/') != std::string::npos) {
    Rational twice = Rational::parse(text) * Rational(2);
    if (!twice.is_integer() || twice < Rational(0)) throw ConfigError("--spin: '" + text + "' is not a spin value");
    return static_cast<int>(twice.to_double());
  }
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size() || v < 1) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("--spin expects 2s as a positive integer or a fraction such as 1/2");
  }
}

std::string config_token(const Json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_array()) {
    std::string joined;
    for (const auto& item : value) joined += (joined.empty() ? "" : ",") + config_token(item);
    return joined;
  }
  return value.dump();
}

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Expands --config PATH into flags placed right after the subcommand; flags
// given on the command line win.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  Json cfg;
  try {
    cfg = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
  std::vector<std::string> extra;
  for (const auto& item : cfg.items()) {
    const std::string flag = "--" + item.key();
    if (item.key() == "config" || flag_given(args, flag)) continue;
    if (item.value().is_boolean()) {
      if (item.value().get<bool>()) extra.push_back(flag);
      continue;
    }
    extra.push_back(flag);
    extra.push_back(config_token(item.value()));
  }
  const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind('-', 0) != 0; });
  const auto at = sub == args.end() ? args.end() : sub + 1;
  args.insert(at, extra.begin(), extra.end());
  return args;
}

template <Scalar T>
ChainParams<T> chain(const Options& o) {
  ChainParams<T> params{o.sites, parse_twice_spin(o.spin), parse_scalar<T>(o.p), parse_scalar<T>(o.q)};
  params.validate();
  return params;
}

Json chain_json(const Options& o) {
  Json j = Json::object();
  j["sites"] = o.sites;
  j["twice_s"] = parse_twice_spin(o.spin);
  j["p"] = o.p;
  j["q"] = o.q;
  return j;
}

Matrix<Complex> restrict_to(const Matrix<Complex>& m, const std::vector<std::size_t>& idx) {
  Matrix<Complex> out(idx.size(), idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t c = 0; c < idx.size(); ++c) out(r, c) = m(idx[r], idx[c]);
  }
  return out;
}

template <Scalar T>
std::vector<std::size_t> sector(const Options& o, const ChainParams<T>& params) {
  if (o.magnons < 0) {
    std::vector<std::size_t> all(params.space_dim());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    return all;
  }
  if (o.magnons > params.n_sites * params.twice_s) throw ConfigError("--magnons exceeds 2Ns");
  return sector_indices(params.n_sites, params.twice_s, o.magnons);
}

std::string complex_str(Complex v) { return format_scalar(v); }

// spectrum: eigenvalues of T(x) at each sample point.
template <Scalar T>
int cmd_spectrum(const Options& o, Report& report) {
  const auto params = chain<T>(o);
  const auto idx = sector(o, params);
  const auto& xs = o.xs.empty() ? kDefaultSamplePoints : o.xs;
  Json points = Json::array();
  for (const auto& xs_text : xs) points.push_back(xs_text);
  report.params["x"] = points;
  report.params["magnons"] = o.magnons < 0 ? Json(nullptr) : Json(o.magnons);
  for (const auto& text : xs) {
    const T x = parse_scalar<T>(text);
    const auto ev = eigenvalues(restrict_to(to_complex(transfer(x, params)), idx));
    for (std::size_t k = 0; k < ev.size(); ++k) {
      Json row = Json::object();
      row["x"] = text;
      row["index"] = k;
      row["eigenvalue"] = complex_str(ev[k]);
      report.results.push_back(row);
    }
  }
  return kExitOk;
}

// qop: Q(x) eigenvalues over a cutoff sweep, with the trace diagnostics.
template <Scalar T>
int cmd_qop(const Options& o, Report& report) {
  const auto params = chain<T>(o);
  const auto idx = sector(o, params);
  const std::string x_text = o.xs.empty() ? "1/3" : o.xs.front();
  const T x = parse_scalar<T>(x_text);
  const auto cutoffs = o.cutoffs.empty() ? std::vector<std::size_t>{8, 16, 32} : o.cutoffs;
  report.params["x"] = x_text;
  report.params["magnons"] = o.magnons < 0 ? Json(nullptr) : Json(o.magnons);
  report.params["cutoffs"] = cutoffs;
  if (o.magnons >= 0) {
    // Vacuum-type reference only makes sense in the m = 0 sector.
    if (o.magnons == 0) report.params["vacuum_eigenvalue"] = format_scalar(q_eigenvalue(x, std::vector<T>{}, params));
  }
  bool domain_ok = true;
  for (auto cutoff : cutoffs) {
    const auto result = q_operator(x, params, cutoff);
    const auto ev = eigenvalues(restrict_to(to_complex(result.value), idx));
    for (std::size_t k = 0; k < ev.size(); ++k) {
      Json row = Json::object();
      row["cutoff"] = cutoff;
      row["index"] = k;
      row["eigenvalue"] = complex_str(ev[k]);
      row["last_change"] = format_real(result.report.last_change);
      row["decay_exponent"] = format_real(result.report.decay_exponent);
      row["converged"] = result.report.converged;
      report.results.push_back(row);
    }
    domain_ok = result.report.domain_ok;
  }
  return domain_ok ? kExitOk : kExitGuard;
}

// convergence: ‖[T(y),Q(x)]‖ and eigenvalue drift against the cutoff.
template <Scalar T>
int cmd_convergence(const Options& o, Report& report) {
  const auto params = chain<T>(o);
  const auto idx = sector(o, params);
  const std::string x_text = o.xs.empty() ? "1/3" : o.xs.front();
  const T x = parse_scalar<T>(x_text);
  const T y = parse_scalar<T>(o.y);
  const auto cutoffs = o.cutoffs.empty() ? std::vector<std::size_t>{8, 16, 32, 48} : o.cutoffs;
  const double tolerance = o.tolerance > 0 ? o.tolerance : 1e-9;
  report.params["x"] = x_text;
  report.params["y"] = o.y;
  report.params["magnons"] = o.magnons < 0 ? Json(nullptr) : Json(o.magnons);
  report.params["cutoffs"] = cutoffs;
  report.params["tolerance"] = format_real(tolerance);
  const auto t = to_complex(transfer(y, params));
  std::vector<Complex> previous;
  double last_comm = 0.0;
  bool domain_ok = true;
  for (auto cutoff : cutoffs) {
    const auto result = q_operator(x, params, cutoff);
    const auto qm = to_complex(result.value);
    const double comm = max_abs(t * qm - qm * t) / std::max(1e-300, max_abs(t) * max_abs(qm));
    const auto ev = eigenvalues(restrict_to(qm, idx));
    double drift = 0.0;
    if (previous.size() == ev.size()) {
      for (std::size_t k = 0; k < ev.size(); ++k) drift = std::max(drift, std::abs(ev[k] - previous[k]));
    }
    Json row = Json::object();
    row["cutoff"] = cutoff;
    row["commutator"] = format_real(comm);
    row["eigen_drift"] = previous.empty() ? Json(nullptr) : Json(format_real(drift));
    row["last_change"] = format_real(result.report.last_change);
    row["decay_exponent"] = format_real(result.report.decay_exponent);
    row["converged"] = result.report.converged;
    report.results.push_back(row);
    previous = ev;
    last_comm = comm;
    domain_ok = result.report.domain_ok;
  }
  if (!domain_ok) return kExitGuard;
  return last_comm <= tolerance ? kExitOk : kExitCheckFailed;
}

int cmd_bethe(const Options& o, Report& report) {
  if (o.magnons < 0) throw ConfigError("bethe-solve needs --magnons");
  const auto params = chain<Complex>(o);
  SolveOptions so;
  so.seed = o.seed;
  so.random_starts = o.starts;
  so.threads = o.threads;
  if (o.tolerance > 0) so.tolerance = o.tolerance;
  const auto& xs = o.xs.empty() ? kDefaultSamplePoints : o.xs;
  report.params["magnons"] = o.magnons;
  report.params["seed"] = o.seed;
  report.params["starts"] = o.starts;
  report.params["tolerance"] = format_real(so.tolerance);
  report.params["all"] = o.all_solutions;

  std::vector<SolveReport> solutions;
  if (o.all_solutions) {
    solutions = solve_bethe_all(o.magnons, params, so);
    if (solutions.empty()) throw ConvergenceError("Bethe solver: no start converged");
  } else {
    solutions.push_back(solve_bethe(o.magnons, params, so));
  }

  bool ok = true;
  for (std::size_t s = 0; s < solutions.size(); ++s) {
    const auto& sol = solutions[s];
    Json roots = Json::array();
    for (const auto& r : sol.roots.roots) roots.push_back(complex_str(r));
    Json head = Json::object();
    head["kind"] = "solution";
    head["solution"] = s;
    head["roots"] = roots;
    head["max_abs_g"] = format_real(sol.residual);
    head["iterations"] = sol.iterations;
    head["strategy"] = std::string(seed_strategy_id(sol.strategy));
    head["start_index"] = sol.start_index;
    head["converged"] = sol.converged;
    report.results.push_back(head);
    ok = ok && sol.converged;

    const auto g = bethe_residual(sol.roots, params);
    for (std::size_t j = 0; j < g.size(); ++j) {
      Json res = Json::object();
      res["kind"] = "bethe";
      res["solution"] = s;
      res["root"] = j;
      res["residual"] = format_real(std::abs(g[j]));
      report.residuals.push_back(res);
    }
    for (const auto& text : xs) {
      const Complex x = parse_scalar<Complex>(text);
      const Complex t = t_eigenvalue(x, sol.roots.roots, params);
      const auto spectrum = eigenvalues(to_complex(transfer(x, params)));
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& ev : spectrum) nearest = std::min(nearest, std::abs(ev - t));
      const double rel = nearest / std::max(1.0, std::abs(t));
      Json row = Json::object();
      row["kind"] = "eigenvalue";
      row["solution"] = s;
      row["x"] = text;
      row["t"] = complex_str(t);
      row["q"] = complex_str(q_eigenvalue(x, sol.roots.roots, params));
      row["t_spectrum_distance"] = format_real(rel);
      report.results.push_back(row);
      ok = ok && rel <= 1e-9;
    }
  }
  return ok ? kExitOk : kExitCheckFailed;
}

template <Scalar T>
int cmd_verify(const Options& o, const std::vector<std::string>& args, Report& report) {
  SuiteConfig config;
  for (const auto& id : o.relations) config.relations.push_back(parse_relation(id));
  config.points = o.points;
  config.cutoff = o.cutoff;
  config.trace_cutoff = o.trace_cutoff;
  config.seed = o.seed;
  config.threads = o.threads;
  if (o.tolerance > 0) config.tolerance = o.tolerance;
  if (flag_given(args, "--sites") || flag_given(args, "--spin")) {
    config.shapes = {{o.sites, parse_twice_spin(o.spin)}};
  }
  const auto& relations = config.relations.empty() ? all_relations() : config.relations;
  Json ids = Json::array();
  for (auto r : relations) ids.push_back(std::string(relation_id(r)));
  Json shapes = Json::array();
  for (const auto& [n, ts] : config.shapes) shapes.push_back(Json::array({n, ts}));
  // Relation points draw their own p and q.
  report.params.erase("p");
  report.params.erase("q");
  report.params["relations"] = ids;
  report.params["points"] = config.points;
  report.params["shapes"] = shapes;
  report.params["cutoff"] = config.cutoff;
  report.params["trace_cutoff"] = config.trace_cutoff;
  report.params["seed"] = config.seed;
  report.params["tolerance"] = format_real(config.tolerance);

  const auto reports = run_suite<T>(config);
  bool ok = true;
  for (auto r : relations) {
    int passed = 0;
    int total = 0;
    double worst = 0.0;
    for (const auto& rep : reports) {
      if (rep.relation != r) continue;
      ++total;
      passed += rep.passed ? 1 : 0;
      worst = std::max(worst, rep.residual);
    }
    Json row = Json::object();
    row["relation"] = std::string(relation_id(r));
    row["points"] = total;
    row["passed"] = passed;
    row["max_residual"] = format_real(worst);
    report.results.push_back(row);
    ok = ok && passed == total;
  }
  for (const auto& rep : reports) report.residuals.push_back(residual_json(rep));
  return ok ? kExitOk : kExitCheckFailed;
}

template <Scalar T>
std::vector<T> random_roots(std::size_t n, std::mt19937_64& rng) {
  std::vector<T> out;
  while (out.size() < n) {
    const Rational r = random_rational(rng);
    const T v = ScalarTraits<T>::from_rational(r);
    bool clash = r == Rational(0) || r == Rational(-1, 2) || r == Rational(-1);
    for (const auto& u : out) clash = clash || ScalarTraits<T>::is_zero(T(u - v)) || ScalarTraits<T>::is_zero(T(u + v + T(1)));
    if (!clash) out.push_back(v);
  }
  return out;
}

template <Scalar T>
int cmd_identities(const Options& o, Report& report) {
  const double tol = o.tolerance > 0 ? o.tolerance : 1e-6;
  const Summation summation = o.summation == "cesaro" ? Summation::kCesaro : Summation::kPlain;
  if (o.summation != "plain" && o.summation != "cesaro") throw ConfigError("--summation must be plain or cesaro");
  report.params["terms"] = o.terms;
  report.params["summation"] = o.summation;
  report.params["points"] = o.points;
  report.params["max_n"] = o.max_n;
  report.params["seed"] = o.seed;
  report.params["tolerance"] = format_real(tol);
  bool ok = true;
  auto add = [&](const std::string& identity, const std::string& label, const std::string& lhs,
                 const std::string& rhs, const std::string& residual, bool passed, const char* backend) {
    Json row = Json::object();
    row["identity"] = identity;
    row["case"] = label;
    row["backend"] = backend;
    row["lhs"] = lhs;
    row["rhs"] = rhs;
    row["residual"] = residual;
    row["passed"] = passed;
    report.results.push_back(row);
    ok = ok && passed;
  };
  const char* exact_name = ScalarTraits<T>::kName.data();
  auto exact_row = [&](const std::string& identity, const std::string& label, const T& lhs, const T& rhs) {
    const T diff = lhs - rhs;
    const bool pass = ScalarTraits<T>::kExact ? ScalarTraits<T>::is_zero(diff)
                                              : magnitude(diff) <= 1e-9 * std::max(1.0, magnitude(rhs));
    add(identity, label, format_scalar(lhs), format_scalar(rhs), format_real(magnitude(diff)), pass, exact_name);
  };

  // Infinite sums always run in floating point.
  const std::vector<std::pair<Complex, Complex>> gamma_points{
      {-2.5, 0.0}, {-1.3, -0.7}, {0.4, -3.1}, {-3.7, 1.2}, {-0.5, -1.25}};
  for (const auto& [a, b] : gamma_points) {
    const auto r = magic_gamma_sum(a, b, o.terms, summation);
    if (r.divergent) throw ConvergenceError("magic gamma sum outside its plain-summation domain");
    const double err = std::abs(r.extrapolated - r.closed);
    add("magic_gamma_sum", "alpha=" + complex_str(a) + " beta=" + complex_str(b), complex_str(r.extrapolated),
        complex_str(r.closed), format_real(err), err <= tol * std::max(1.0, std::abs(r.closed)), "float");
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    const bool holds = osc_product_identity(n, 6);
    add("osc_product_identity", "n=" + std::to_string(n) + " k=6", holds ? "true" : "false", "true", holds ? "0" : "1",
        holds, "exact");
  }
  const auto pc = chain<Complex>(o);
  for (const auto& [k, m] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {2, 1}, {3, 1}}) {
    const auto h = trace_hyp_sum(k, m, pc.p, pc.q, Complex(1.0 / 3.0));
    const double err = std::abs(h.lhs - h.rhs);
    add("trace_hyp_sum", "k=" + std::to_string(k) + " m=" + std::to_string(m), complex_str(h.lhs), complex_str(h.rhs),
        format_real(err), err <= tol * std::max(1.0, std::abs(h.rhs)), "float");
    const double spread = trace_hyp_x_spread(k, m, pc.p, pc.q, {1.0 / 3.0, 0.4, Complex(-0.2, 0.3)});
    add("trace_hyp_x_independence", "k=" + std::to_string(k) + " m=" + std::to_string(m), format_real(spread), "0",
        format_real(spread), spread <= 1e-8, "float");
  }
  const auto params = chain<T>(o);
  for (int ts = 0; ts <= 2; ++ts) {
    for (int m = 0; m <= 2; ++m) {
      for (int w = 0; w <= 3; ++w) {
        const auto [lhs, rhs] = binom_gamma_sum(w, ts, m, params.p, params.q);
        exact_row("binom_gamma_sum", "w=" + std::to_string(w) + " twice_s=" + std::to_string(ts) + " m=" +
                                         std::to_string(m), lhs, rhs);
      }
    }
  }
  for (int n = 1; n <= 3; ++n) {
    for (int ts = 1; ts <= 2; ++ts) {
      for (int m = 0; m <= 2; ++m) {
        const auto nn = nested_normalization(n, ts, m, params.p, params.q);
        const std::string label = "N=" + std::to_string(n) + " twice_s=" + std::to_string(ts) + " m=" + std::to_string(m);
        exact_row("nested_normalization", label + " direct", nn.direct, nn.closed);
        exact_row("nested_normalization", label + " successive", nn.successive, nn.closed);
      }
    }
  }
  std::mt19937_64 rng(o.seed);
  for (int pt = 0; pt < o.points; ++pt) {
    for (int n = 1; n <= o.max_n; ++n) {
      const std::string label = "point=" + std::to_string(pt) + " n=" + std::to_string(n);
      for (int attempt = 0;; ++attempt) {
        try {
          const auto roots = random_roots<T>(static_cast<std::size_t>(n), rng);
          const T x0 = ScalarTraits<T>::from_rational(random_rational(rng));
          const T x = ScalarTraits<T>::from_rational(random_rational(rng));
          const T nn = from_ratio<T>(n);
          const T magic = magic_sum_open(roots, x0, params.p);
          const T sec = secsum(roots);
          const auto pf = partial_fraction_check(roots, x);
          exact_row("magic_sum_open", label, magic, nn);
          exact_row("secsum", label, sec, nn);
          exact_row("partial_fraction_f", label, pf.f_lhs, pf.f_rhs);
          exact_row("partial_fraction_h", label, pf.h_lhs, pf.h_rhs);
          break;
        } catch (const PoleError&) {
          if (attempt > 100) throw;
        }
      }
    }
  }
  return ok ? kExitOk : kExitCheckFailed;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--sites", o.sites, "Number of sites N");
  sub->add_option("--spin", o.spin, "Spin as 2s (integer) or as a fraction such as 1/2");
  sub->add_option("--p", o.p, "Left boundary parameter p");
  sub->add_option("--q", o.q, "Right boundary parameter q");
  sub->add_option("--backend", o.backend, "exact (rational) or float")->check(CLI::IsMember({"exact", "float"}));
  sub->add_option("--seed", o.seed, "Seed for random points and solver starts");
  sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--config", o.config, "JSON file with flag values");
  sub->add_option("--csv", o.csv, "Also write results[] as CSV to this path");
  sub->add_option("--output", o.output, "Write the JSON report here instead of stdout");
  sub->add_flag("--timing", o.timing, "Record wall time in the report");
}

template <class F>
int dispatch(const std::string& backend, F&& f) {
  if (backend == "exact") return f(Rational{});
  return f(Complex{});
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Open XXX spin chain: transfer matrices, Q-operators, Bethe roots and identity checks", "openq"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues of T(x) at sample points");
  auto* qop = app.add_subcommand("qop", "Q(x) eigenvalues over a cutoff sweep");
  auto* bethe = app.add_subcommand("bethe-solve", "Solve the Bethe equations and tabulate t(x), Q(x)");
  auto* verify = app.add_subcommand("verify", "Residuals of the operator relations at random points");
  auto* ident = app.add_subcommand("identities", "Scalar summation identities");
  auto* conv = app.add_subcommand("convergence", "Cutoff study of [T,Q] and Q eigenvalue drift");
  for (auto* sub : {spectrum, qop, bethe, verify, ident, conv}) add_common(sub, o);

  for (auto* sub : {spectrum, qop, bethe, conv}) {
    sub->add_option("--x", o.xs, "Spectral parameter(s), comma separated")->delimiter(',');
    sub->add_option("--magnons", o.magnons, "Magnon number m (restricts spectra to that sector)");
  }
  for (auto* sub : {qop, conv}) sub->add_option("--cutoffs", o.cutoffs, "Fock cutoffs, comma separated")->delimiter(',');
  conv->add_option("--y", o.y, "Spectral parameter of T(y)");
  for (auto* sub : {bethe, verify, ident, conv}) sub->add_option("--tolerance", o.tolerance, "Pass threshold");
  bethe->add_option("--starts", o.starts, "Random starts for the disk strategy")->check(CLI::PositiveNumber);
  bethe->add_flag("--all", o.all_solutions, "Report every distinct solution found");
  verify->add_option("--relation", o.relations, "Relation id(s), comma separated (default: all)")->delimiter(',');
  verify->add_option("--cutoff", o.cutoff, "Fock cutoff for polynomial relations");
  verify->add_option("--trace-cutoff", o.trace_cutoff, "Fock cutoff for truncated-trace relations");
  for (auto* sub : {verify, ident}) sub->add_option("--points", o.points, "Random points")->check(CLI::PositiveNumber);
  ident->add_option("--terms", o.terms, "Term cap for infinite sums");
  ident->add_option("--summation", o.summation, "plain or cesaro");
  ident->add_option("--max-n", o.max_n, "Largest root-set size for the finite identities");

  std::vector<std::string> args;
  try {
    args = apply_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const ConfigError& e) {
    err << "openq: " << e.what() << "\n";
    return kExitUsage;
  }

  Report report;
  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    CLI::App* chosen = app.get_subcommands().front();
    report.command = chosen->get_name();
    std::string backend = o.backend;
    if (backend.empty()) backend = (chosen == verify || chosen == ident) ? "exact" : "float";
    if (chosen == bethe && backend == "exact") throw ConfigError("bethe-solve runs in floating point only");
    report.backend = backend;
    report.params = chain_json(o);
    if (chosen == spectrum) {
      code = dispatch(backend, [&](auto tag) { return cmd_spectrum<decltype(tag)>(o, report); });
    } else if (chosen == qop) {
      code = dispatch(backend, [&](auto tag) { return cmd_qop<decltype(tag)>(o, report); });
    } else if (chosen == conv) {
      code = dispatch(backend, [&](auto tag) { return cmd_convergence<decltype(tag)>(o, report); });
    } else if (chosen == bethe) {
      code = cmd_bethe(o, report);
    } else if (chosen == verify) {
      code = dispatch(backend, [&](auto tag) { return cmd_verify<decltype(tag)>(o, args, report); });
    } else {
      code = dispatch(backend, [&](auto tag) { return cmd_identities<decltype(tag)>(o, report); });
    }
  } catch (const PoleError& e) {
    err << "openq: pole: " << e.what() << "\n";
    return kExitGuard;
  } catch (const ConvergenceError& e) {
    err << "openq: divergence: " << e.what() << "\n";
    return kExitGuard;
  } catch (const Error& e) {
    err << "openq: " << e.what() << "\n";
    return kExitUsage;
  }
  if (o.timing) {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.timing = Json::object({{"wall_seconds", seconds}});
  }

  const std::string json = render_json(report);
  if (o.output.empty()) {
    out << json;
  } else {
    std::ofstream file(o.output, std::ios::binary);
    if (!file) {
      err << "openq: cannot write '" << o.output << "'\n";
      return kExitUsage;
    }
    file << json;
  }
  if (!o.csv.empty()) {
    std::ofstream file(o.csv, std::ios::binary);
    if (!file) {
      err << "openq: cannot write '" << o.csv << "'\n";
      return kExitUsage;
    }
    file << render_csv(report);
  }
  return code;
}

}  // namespace openq
