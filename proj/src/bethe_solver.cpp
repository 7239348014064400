#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "openq/bethe.hpp"

namespace openq {
namespace {

using CL = std::complex<long double>;

struct Model {
  int n_sites;
  long double s;
  CL p;
  CL q;
};

Model model_of(const ChainParams<Complex>& params) {
  return {params.n_sites, params.twice_s / 2.0L, CL(params.p), CL(params.q)};
}

CL cpow(CL base, int e) {
  CL out(1);
  for (int k = 0; k < e; ++k) out *= base;
  return out;
}

// Bethe equations with all denominators cleared; same zeros as G_j for
// admissible roots.
std::vector<CL> cleared(const std::vector<CL>& x, const Model& m, std::vector<long double>* scale = nullptr) {
  const std::size_t n = x.size();
  std::vector<CL> out(n);
  if (scale) scale->assign(n, 0.0L);
  for (std::size_t j = 0; j < n; ++j) {
    const CL xj = x[j];
    CL lhs = (m.p + xj) * (m.q + xj) * cpow(xj + 0.5L + m.s, 2 * m.n_sites);
    CL rhs = (m.p - xj - 1.0L) * (m.q - xj - 1.0L) * cpow(xj + 0.5L - m.s, 2 * m.n_sites);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      lhs *= (xj + x[k]) * (xj - x[k] - 1.0L);
      rhs *= (xj - x[k] + 1.0L) * (xj + x[k] + 2.0L);
    }
    out[j] = lhs - rhs;
    if (scale) (*scale)[j] = std::abs(lhs) + std::abs(rhs);
  }
  return out;
}

// Solves a x = b in place by Gaussian elimination; false on a singular pivot.
bool solve_linear(std::vector<std::vector<CL>> a, std::vector<CL>& b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-200L) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const CL factor = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= factor * a[c][k];
      b[r] -= factor * b[c];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    for (std::size_t k = c + 1; k < n; ++k) b[c] -= a[c][k] * b[k];
    b[c] /= a[c][c];
  }
  return true;
}

struct NewtonResult {
  std::vector<CL> roots;
  int iterations = 0;
  bool finished = false;
};

NewtonResult newton(std::vector<CL> x, const Model& m, int max_iterations) {
  const std::size_t n = x.size();
  NewtonResult out;
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    auto e = cleared(x, m);
    std::vector<std::vector<CL>> jac(n, std::vector<CL>(n));
    for (std::size_t k = 0; k < n; ++k) {
      const long double step = 1e-7L * (1.0L + std::abs(x[k]));
      auto plus = x;
      auto minus = x;
      plus[k] += step;
      minus[k] -= step;
      const auto ep = cleared(plus, m);
      const auto em = cleared(minus, m);
      for (std::size_t j = 0; j < n; ++j) jac[j][k] = (ep[j] - em[j]) / (2.0L * step);
    }
    for (auto& v : e) v = -v;
    if (!solve_linear(std::move(jac), e)) break;
    long double change = 0;
    long double size = 1;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += e[k];
      change = std::max(change, std::abs(e[k]));
      size = std::max(size, std::abs(x[k]));
      if (!std::isfinite(std::abs(x[k])) || std::abs(x[k]) > 1e8L) return out;
    }
    if (change < 1e-17L * size) {
      out.finished = true;
      break;
    }
  }
  out.roots = std::move(x);
  out.finished = out.finished || !out.roots.empty();
  return out;
}

// Both sides of each cleared equation must cancel against each other; a
// root set where both sides are merely tiny (colliding pairs near 0) is
// spurious even though |G_j| is small there.
bool genuine_cancellation(const std::vector<CL>& x, const Model& m) {
  std::vector<long double> scale;
  const auto e = cleared(x, m, &scale);
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (!(std::abs(e[j]) <= 1e-9L * scale[j])) return false;
  }
  return true;
}

bool admissible(const std::vector<Complex>& x) {
  constexpr double kMin = 1e-6;
  for (std::size_t j = 0; j < x.size(); ++j) {
    for (double bad : {0.0, -0.5, -1.0}) {
      if (std::abs(x[j] - Complex(bad)) < kMin) return false;
    }
    for (std::size_t k = 0; k < j; ++k) {
      if (std::abs(x[j] - x[k]) < kMin || std::abs(x[j] + x[k] + 1.0) < kMin) return false;
    }
  }
  return true;
}

bool same_solution(const RootSet& a, const RootSet& b) {
  if (a.roots.size() != b.roots.size()) return false;
  for (std::size_t k = 0; k < a.roots.size(); ++k) {
    if (std::abs(a.roots[k] - b.roots[k]) > 1e-7 * (1.0 + std::abs(a.roots[k]))) return false;
  }
  return true;
}

bool canonical_less(const RootSet& a, const RootSet& b) {
  for (std::size_t k = 0; k < std::min(a.roots.size(), b.roots.size()); ++k) {
    const Complex u = a.roots[k];
    const Complex v = b.roots[k];
    if (std::abs(u.real() - v.real()) > 1e-9) return u.real() < v.real();
    if (std::abs(u.imag() - v.imag()) > 1e-9) return u.imag() < v.imag();
  }
  return a.roots.size() < b.roots.size();
}

std::vector<std::vector<CL>> large_boundary_seeds(int magnons, const Model& m, std::mt19937_64& rng) {
  std::vector<CL> singles;
  const int count = 2 * m.n_sites;
  for (int k = 1; k < count; ++k) {
    const long double cot = 1.0L / std::tan(std::numbers::pi_v<long double> * k / count);
    singles.emplace_back(-0.5L, -m.s * cot);
  }
  std::vector<std::vector<CL>> seeds;
  std::uniform_real_distribution<long double> jitter(-1e-3L, 1e-3L);
  const auto n = singles.size();
  if (static_cast<std::size_t>(magnons) > n) return seeds;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + magnons, true);
  do {
    std::vector<CL> seed;
    for (std::size_t k = 0; k < n; ++k) {
      if (pick[k]) seed.push_back(singles[k] + CL(jitter(rng), jitter(rng)));
    }
    seeds.push_back(std::move(seed));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return seeds;
}

std::vector<std::vector<CL>> disk_seeds(int magnons, const Model& m, int starts, std::mt19937_64& rng) {
  // Boundary roots scale with p and q, bulk roots with Ns.
  const long double radius = std::max({2.0L, m.n_sites * m.s, std::abs(m.p), std::abs(m.q)});
  std::uniform_real_distribution<long double> unit(0.0L, 1.0L);
  std::vector<std::vector<CL>> seeds(static_cast<std::size_t>(starts));
  for (auto& seed : seeds) {
    for (int k = 0; k < magnons; ++k) {
      const long double r = radius * std::sqrt(unit(rng));
      const long double phi = 2 * std::numbers::pi_v<long double> * unit(rng);
      seed.push_back(std::polar(r, phi) - CL(0.5L));
    }
  }
  return seeds;
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) body(k);
    });
  }
}

std::optional<SolveReport> finish(const NewtonResult& nr, const ChainParams<Complex>& params,
                                  const SolveOptions& options, SeedStrategy strategy, int index) {
  if (nr.roots.empty()) return std::nullopt;
  std::vector<Complex> roots;
  for (const auto& r : nr.roots) roots.emplace_back(static_cast<double>(r.real()), static_cast<double>(r.imag()));
  if (!admissible(roots) || !genuine_cancellation(nr.roots, model_of(params))) return std::nullopt;
  RootSet set = canonicalize(roots);
  double residual = 0;
  try {
    const auto g = bethe_residual(set, params);
    CoefficientContext<Complex> ctx(set.roots, params);
    const auto every = ctx.all();
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double scale = std::max(1.0, std::abs((params.p + set.roots[j]) * ctx.a(j, every)));
      residual = std::max(residual, std::abs(g[j]) / scale);
    }
  } catch (const PoleError&) {
    return std::nullopt;
  }
  if (!std::isfinite(residual) || residual > options.tolerance) return std::nullopt;
  SolveReport out;
  out.roots = std::move(set);
  out.residual = residual;
  out.iterations = nr.iterations;
  out.converged = true;
  out.strategy = strategy;
  out.start_index = index;
  return out;
}

std::vector<std::optional<SolveReport>> run_strategy(SeedStrategy strategy, int magnons,
                                                     const ChainParams<Complex>& params,
                                                     const SolveOptions& options) {
  const Model m = model_of(params);
  std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(strategy) * 0x9e3779b97f4a7c15ULL);
  std::vector<std::vector<CL>> seeds;
  switch (strategy) {
    case SeedStrategy::kLargeBoundary:
      seeds = large_boundary_seeds(magnons, m, rng);
      break;
    case SeedStrategy::kRandomDisk:
      seeds = disk_seeds(magnons, m, options.random_starts, rng);
      break;
    case SeedStrategy::kHomotopy:
      if (options.homotopy_roots && options.homotopy_p_start &&
          options.homotopy_roots->roots.size() == static_cast<std::size_t>(magnons)) {
        std::vector<CL> seed;
        for (const auto& r : options.homotopy_roots->roots) seed.emplace_back(r);
        seeds.push_back(std::move(seed));
      }
      break;
  }
  std::vector<std::optional<SolveReport>> out(seeds.size());
  parallel_for(seeds.size(), options.threads, [&](std::size_t k) {
    NewtonResult nr;
    if (strategy == SeedStrategy::kHomotopy) {
      constexpr int kSteps = 32;
      const CL p0(*options.homotopy_p_start);
      std::vector<CL> x = seeds[k];
      int total = 0;
      for (int step = 1; step <= kSteps && !x.empty(); ++step) {
        Model stage = m;
        stage.p = p0 + (m.p - p0) * static_cast<long double>(step) / static_cast<long double>(kSteps);
        auto r = newton(x, stage, options.max_iterations);
        total += r.iterations;
        x = std::move(r.roots);
      }
      nr.roots = std::move(x);
      nr.iterations = total;
    } else {
      nr = newton(seeds[k], m, options.max_iterations);
    }
    out[k] = finish(nr, params, options, strategy, static_cast<int>(k));
  });
  return out;
}

void check_magnons(int magnons, const ChainParams<Complex>& params) {
  params.validate();
  if (magnons < 0 || magnons > params.n_sites * params.twice_s) {
    throw ConfigError("magnon number must lie in [0, 2Ns]");
  }
}

constexpr std::array<SeedStrategy, 3> kStrategies{SeedStrategy::kLargeBoundary, SeedStrategy::kRandomDisk,
                                                  SeedStrategy::kHomotopy};

}  // namespace

std::string_view seed_strategy_id(SeedStrategy s) {
  switch (s) {
    case SeedStrategy::kLargeBoundary:
      return "large-boundary";
    case SeedStrategy::kRandomDisk:
      return "random-disk";
    case SeedStrategy::kHomotopy:
      return "homotopy";
  }
  return "?";
}

RootSet canonicalize(std::vector<Complex> roots) {
  for (auto& r : roots) {
    if (r.real() < -0.5 - 1e-12 || (std::abs(r.real() + 0.5) <= 1e-12 && r.imag() < 0)) r = -r - 1.0;
  }
  std::sort(roots.begin(), roots.end(), [](const Complex& u, const Complex& v) {
    if (std::abs(u.real() - v.real()) > 1e-9) return u.real() < v.real();
    return u.imag() < v.imag();
  });
  return {std::move(roots)};
}

std::vector<Complex> bethe_residual(const RootSet& roots, const ChainParams<Complex>& params) {
  CoefficientContext<Complex> ctx(roots.roots, params);
  std::vector<Complex> out;
  for (std::size_t j = 0; j < roots.roots.size(); ++j) out.push_back(ctx.bethe_g(j));
  return out;
}

SolveReport solve_bethe(int magnons, const ChainParams<Complex>& params, const SolveOptions& options) {
  check_magnons(magnons, params);
  if (magnons == 0) {
    SolveReport out;
    out.converged = true;
    return out;
  }
  int degenerate = 0;
  for (auto strategy : kStrategies) {
    const auto attempts = run_strategy(strategy, magnons, params, options);
    std::optional<SolveReport> best;
    for (const auto& a : attempts) {
      if (!a) {
        ++degenerate;
        continue;
      }
      if (!best || a->residual < best->residual) best = a;
    }
    if (best) return *best;
  }
  throw ConvergenceError("Bethe solver: no start converged (" + std::to_string(degenerate) +
                         " starts diverged, hit a singular Jacobian or left the admissible region)");
}

std::vector<SolveReport> solve_bethe_all(int magnons, const ChainParams<Complex>& params,
                                         const SolveOptions& options) {
  check_magnons(magnons, params);
  std::vector<SolveReport> found;
  if (magnons == 0) {
    SolveReport out;
    out.converged = true;
    return {out};
  }
  for (auto strategy : kStrategies) {
    for (const auto& a : run_strategy(strategy, magnons, params, options)) {
      if (!a) continue;
      auto it = std::find_if(found.begin(), found.end(), [&](const SolveReport& r) { return same_solution(r.roots, a->roots); });
      if (it == found.end()) {
        found.push_back(*a);
      } else if (a->residual < it->residual) {
        *it = *a;
      }
    }
  }
  std::sort(found.begin(), found.end(),
            [](const SolveReport& u, const SolveReport& v) { return canonical_less(u.roots, v.roots); });
  return found;
}

}  // namespace openq
