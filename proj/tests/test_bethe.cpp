#include <random>

#include "doctest.h"
#include "openq/bethe.hpp"
#include "openq/verify.hpp"

using namespace openq;

namespace {

using R = Rational;

std::vector<R> distinct_roots(std::size_t n, std::mt19937_64& rng) {
  std::vector<R> out;
  while (out.size() < n) {
    const R v = random_rational(rng);
    bool ok = !(v == R(0) || v == R(-1, 2) || v == R(-1));
    for (const auto& u : out) ok = ok && !(u == v) && !(u + v + R(1) == R(0)) && !(u - v == R(1)) && !(v - u == R(1));
    if (ok) out.push_back(v);
  }
  return out;
}

double nearest_eigenvalue_distance(const Matrix<Complex>& t, Complex value) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ev : eigenvalues(t)) best = std::min(best, std::abs(ev - value));
  return best;
}

const std::vector<Complex> kSamplePoints{Complex(1.0 / 3), Complex(0.4), Complex(-3.0 / 7), Complex(0.7, 0.2),
                                         Complex(2.5, -1.0)};

// Component of v outside the column space of m (modified Gram-Schmidt).
double distance_from_range(const Matrix<Complex>& m, Vector<Complex> v) {
  std::vector<Vector<Complex>> basis;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    Vector<Complex> col(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) col[r] = m(r, c);
    for (const auto& b : basis) {
      Complex dot = 0.0;
      for (std::size_t r = 0; r < col.size(); ++r) dot += std::conj(b[r]) * col[r];
      for (std::size_t r = 0; r < col.size(); ++r) col[r] -= dot * b[r];
    }
    const double norm = norm2(col);
    if (norm < 1e-10 * (1.0 + max_abs(m))) continue;
    for (auto& e : col) e /= norm;
    basis.push_back(col);
  }
  for (const auto& b : basis) {
    Complex dot = 0.0;
    for (std::size_t r = 0; r < v.size(); ++r) dot += std::conj(b[r]) * v[r];
    for (std::size_t r = 0; r < v.size(); ++r) v[r] -= dot * b[r];
  }
  return norm2(v);
}

}  // namespace

TEST_CASE("exchange-relation functions") {
  const R x(5, 7), y(-2, 9);
  CHECK(fcr_function(FcrFunction::kF, x, R(0)) == (x - R(1)) / (x + R(1)));
  CHECK(fcr_function(FcrFunction::kH, x, y) * (x - y) * (x + y + R(1)) == (x - y + R(1)) * (x + y + R(2)));
  for (auto f : {FcrFunction::kF, FcrFunction::kH, FcrFunction::kGA, FcrFunction::kLDA}) {
    CHECK(parse_fcr_function(fcr_function_id(f)) == f);
  }
  CHECK(parse_fcr_function("G_A") == FcrFunction::kGA);
  CHECK_THROWS_AS(parse_fcr_function("zz"), ConfigError);
  CHECK_THROWS_AS(fcr_function(FcrFunction::kF, x, x), PoleError);
}

TEST_CASE("off-shell states") {
  const ChainParams<R> one{1, 1, R(7, 2), R(-9, 4)};
  CHECK(offshell_state<R>({}, one) == reference_state(one));
  const auto psi = offshell_state<R>({R(1, 3)}, one);
  CHECK(psi[0] == R(0));
  CHECK_FALSE(psi[1] == R(0));

  const ChainParams<R> two{2, 2, R(5, 3), R(-7, 4)};
  CHECK(offshell_state<R>({R(1, 3), R(-2, 5)}, two) == offshell_state<R>({R(-2, 5), R(1, 3)}, two));
}

TEST_CASE("Bethe residual for one site, one magnon") {
  const ChainParams<R> params{1, 1, R(7, 2), R(-9, 4)};
  const R x(3, 5), p = params.p, q = params.q;
  const CoefficientContext<R> ctx({x}, params);
  const R expect = (p + x) * R(2) * x * (q + x) * (x + R(1)) * (x + R(1)) / (R(1) + R(2) * x) -
                   (p - x - R(1)) * R(2) * x / (R(2) * x + R(1)) * (q - x - R(1)) * x * x;
  CHECK(ctx.bethe_g(0) == expect);
  CHECK(ctx.a(0, ctx.all()) == R(2) * x * alpha(x, params) / (R(1) + R(2) * x));
}

TEST_CASE("G is invariant under relabelling the roots") {
  const ChainParams<R> params{2, 2, R(5, 3), R(-7, 4)};
  const std::vector<R> roots{R(1, 3), R(-2, 5), R(7, 4)};
  const std::vector<R> rotated{R(7, 4), R(1, 3), R(-2, 5)};
  const CoefficientContext<R> a(roots, params), b(rotated, params);
  CHECK(a.bethe_g(0) == b.bethe_g(1));
  CHECK(a.bethe_g(1) == b.bethe_g(2));
  CHECK(a.bethe_g(2) == b.bethe_g(0));
}

TEST_CASE("off-shell T action is t(x) plus the unwanted terms, exactly") {
  std::mt19937_64 rng(23);
  for (int ts = 1; ts <= 2; ++ts) {
    for (std::size_t m = 0; m <= 2; ++m) {
      const ChainParams<R> params{2, ts, random_rational(rng), random_rational(rng)};
      const auto roots = distinct_roots(m, rng);
      const R x(3, 13);
      const auto lhs = transfer(x, params).apply(offshell_state(roots, params));
      const R t = t_eigenvalue(x, roots, params);
      const CoefficientContext<R> ctx(roots, params);
      auto rhs = offshell_state(roots, params);
      for (auto& v : rhs) v *= t;
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<R> others{x};
        for (std::size_t k = 0; k < m; ++k) {
          if (k != j) others.push_back(roots[k]);
        }
        const R coeff = R(2) * (x + R(1)) * ctx.bethe_g(j) / ((x - roots[j]) * (x + roots[j] + R(1)));
        const auto term = offshell_state(others, params);
        for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] += coeff * term[k];
      }
      CAPTURE(ts);
      CAPTURE(m);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("both forms of the two-index C coefficient agree") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const ChainParams<R> params{2, 1 + trial % 2, random_rational(rng), random_rational(rng)};
    const CoefficientContext<R> ctx(distinct_roots(4, rng), params);
    CHECK(ctx.c2_t(1, 2, ctx.rest()) == ctx.c2_s(1, 2, ctx.rest()));
    CHECK(ctx.c2_t(3, 1, ctx.rest()) == ctx.c2_s(3, 1, ctx.rest()));
  }
}

TEST_CASE("unwanted-term coefficients: recursion and closed form") {
  std::mt19937_64 rng(41);
  int points = 0;
  while (points < 10) {
    const ChainParams<R> params{1 + points % 2, 1 + points / 2 % 2, random_rational(rng), random_rational(rng)};
    const CoefficientContext<R> ctx(distinct_roots(5, rng), params);
    const auto j = ctx.rest();
    std::vector<std::pair<R, R>> pairs;
    try {
      for (int n = 0; n <= 4; ++n) {
        const std::vector<std::size_t> sub(j.begin(), j.begin() + n);
        for (int i = 0; i <= 1; ++i) pairs.emplace_back(ctx.g_recursive(n, i, j, sub), ctx.g_closed(n, i, j, sub));
      }
    } catch (const PoleError&) {
      continue;  // a root difference hit a pole of the recursion; redraw
    }
    for (const auto& [rec, closed] : pairs) CHECK(rec == closed);
    ++points;
  }
}

TEST_CASE("n = 0 initial condition") {
  const ChainParams<R> params{2, 1, R(5, 3), R(-7, 4)};
  const CoefficientContext<R> ctx({R(1, 3), R(-2, 5), R(7, 4)}, params);
  const auto j = ctx.rest();
  const R x1 = ctx.roots()[0];
  for (int i = 0; i <= 2; ++i) {
    const R ri(i);
    CHECK(ctx.g_recursive(0, i, j, {}) ==
          (-params.p - x1 + ri) * ctx.a(0, j) + (params.p - x1 - R(1) - ri) * ctx.dt(0, j));
  }
  CHECK_THROWS_AS(ctx.g_closed(1, 0, j, {0}), ConfigError);
}

TEST_CASE("X_n sums to n!") {
  std::mt19937_64 rng(2);
  const R p(37, 4);
  CHECK(x_n_sum<R>({R(2, 7)}, R(1, 3), p) == R(1));
  R factorial(1);
  for (std::size_t n = 1; n <= 5; ++n) {
    factorial *= R(static_cast<long>(n));
    const auto roots = distinct_roots(n, rng);
    CHECK(x_n_sum(roots, R(3, 17), p) == factorial);
  }
  const auto roots = distinct_roots(3, rng);
  const R x1(5, 19);
  CHECK(x_n_sum(roots, x1, p) == x_n_sum(roots, R(-x1 - R(1)), p));
}

TEST_CASE("rewritten coefficient equals the closed form on shell") {
  const ChainParams<R> params{2, 2, R(37, 4), R(29, 4)};
  CoefficientContext<R> ctx({R(1, 3), R(2, 7), R(-5, 11), R(3, 13)}, params);
  ctx.use_on_shell_delta();
  const auto j = ctx.rest();
  for (int n = 1; n <= 3; ++n) {
    const std::vector<std::size_t> sub(j.begin(), j.begin() + n);
    CHECK(ctx.g_altform(sub) == ctx.g_closed(n, 0, j, sub));
  }
}

TEST_CASE("X on the reduced off-shell state expands in the unwanted-term coefficients") {
  // Two magnons on two spin-1 sites: B(x₁) maps the 2-dim one-magnon sector
  // into the 3-dim two-magnon sector, so "equal up to B(x₁) terms" is a
  // genuine constraint.
  const ChainParams<Complex> params{2, 2, Complex(37.0 / 4), Complex(29.0 / 4)};
  const std::vector<Complex> roots{Complex(0.35, 0.2), Complex(-0.8, 0.1)};
  const Complex x(0.3);
  const std::size_t cutoff = 40;
  const CoefficientContext<Complex> ctx(roots, params);
  const auto i1 = ctx.rest();
  const auto lhs = x_op(0, 0, x, roots[0], params, cutoff).apply(offshell_state<Complex>({roots[1]}, params));

  auto expansion = [&](Complex tweak) {
    Vector<Complex> rhs(lhs.size());
    const auto w11 = w_op(1, 1, x, params, cutoff).value.apply(offshell_state<Complex>({roots[1]}, params));
    const auto w22 = w_op(2, 2, x, params, cutoff).value.apply(reference_state(params));
    const Complex g0 = ctx.g_closed(0, 0, i1, {});
    const Complex g1 = ctx.g_closed(1, 0, i1, {1}) * tweak;
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = g0 * w11[k] + g1 * w22[k];
    Vector<Complex> diff(lhs.size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = lhs[k] - rhs[k];
    return diff;
  };
  const auto b1 = double_row_blocks(roots[0], params).b;
  const double scale = norm2(lhs);
  REQUIRE(scale > 0.0);
  CHECK(distance_from_range(b1, expansion(1.0)) < 1e-9 * scale);
  // Control: a wrong coefficient leaves a component outside the range.
  CHECK(distance_from_range(b1, expansion(1.1)) > 1e-4 * scale);
}

TEST_CASE("q eigenvalue") {
  const ChainParams<R> params{2, 1, R(37, 4), R(29, 4)};
  CHECK(q_eigenvalue(R(1, 3), {}, params) == R(1) / (-params.p - params.q - R(2)));
  const R x(2, 9), r(4, 11);
  CHECK(q_polynomial(x, {r, R(1, 5)}) == q_polynomial(x, {R(-r - R(1)), R(1, 5)}));
  CHECK_THROWS_AS(q_eigenvalue(R(1, 3), {}, ChainParams<R>{1, 1, R(-1), R(0)}), PoleError);
}

TEST_CASE("one-site root against the brute-force transfer matrix") {
  const ChainParams<Complex> params{1, 1, Complex(3.5), Complex(-2.25)};
  const auto sol = solve_bethe(1, params);
  REQUIRE(sol.converged);
  CHECK(sol.residual < 1e-10);
  const Complex root = sol.roots.roots[0];
  const Complex x(0.3);
  // T is triangular in the magnon grading; the one-magnon eigenvalue is T(1,1).
  const Complex t = to_complex(transfer(x, params))(1, 1);
  const Complex a0 = 2.0 * (1.0 + x) * (params.p + x) / (1.0 + 2.0 * x) * alpha(x, params);
  const Complex d0 = (params.p - x - 1.0) * delta_tilde(x, params);
  // t(x) is linear in u = x₁(x₁+1) once the denominators are cleared.
  const Complex u = (t * (x * x + x) - a0 * (x * x - x) - d0 * (x + 1.0) * (x + 2.0)) / (t - a0 - d0);
  CHECK(std::abs(u - root * (root + 1.0)) < 1e-9 * std::abs(u));
}

TEST_CASE("solved roots reproduce transfer-matrix eigenvalues") {
  for (const auto& [ts, m] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {2, 2}}) {
    const ChainParams<Complex> params{2, ts, Complex(37.0 / 4), Complex(29.0 / 4)};
    const auto sol = solve_bethe(m, params);
    REQUIRE(sol.converged);
    CHECK(sol.residual < 1e-10);
    for (const auto& x : kSamplePoints) {
      const Complex t = t_eigenvalue(x, sol.roots.roots, params);
      CHECK(nearest_eigenvalue_distance(to_complex(transfer(x, params)), t) <= 1e-9 * std::max(1.0, std::abs(t)));
    }
  }
}

TEST_CASE("Q acts on an on-shell state by its eigenvalue") {
  const ChainParams<Complex> params{2, 1, Complex(37.0 / 4), Complex(29.0 / 4)};
  const auto sol = solve_bethe(1, params);
  const auto psi = offshell_state(sol.roots.roots, params);
  const Complex x(0.3);
  const Complex lambda = q_eigenvalue(x, sol.roots.roots, params);
  const auto qpsi = q_operator(x, params, 48).value.apply(psi);
  double diff = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    diff = std::max(diff, std::abs(qpsi[k] - lambda * psi[k]));
    scale = std::max(scale, std::abs(lambda * psi[k]));
  }
  CHECK(diff < 1e-7 * scale);
}

TEST_CASE("solution counts never exceed the sector dimension") {
  for (const auto& [n, ts] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {3, 1}}) {
    const ChainParams<Complex> params{n, ts, Complex(37.0 / 4), Complex(29.0 / 4)};
    for (int m = 1; m <= n * ts; ++m) {
      const auto all = solve_bethe_all(m, params);
      CAPTURE(n);
      CAPTURE(ts);
      CAPTURE(m);
      CHECK(all.size() <= sector_indices(n, ts, m).size());
      for (const auto& sol : all) CHECK(sol.residual < 1e-10);
    }
  }
}

TEST_CASE("solver is deterministic across thread counts") {
  const ChainParams<Complex> params{2, 2, Complex(37.0 / 4), Complex(29.0 / 4)};
  SolveOptions one;
  SolveOptions many;
  many.threads = 4;
  const auto a = solve_bethe_all(2, params, one);
  const auto b = solve_bethe_all(2, params, many);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].roots.roots == b[k].roots.roots);
}

TEST_CASE("canonical root sets") {
  const auto set = canonicalize({Complex(-1.5, 0.0), Complex(-0.5, -2.0), Complex(0.25, 1.0)});
  REQUIRE(set.magnons() == 3);
  CHECK(set.roots[0] == Complex(-0.5, 2.0));
  CHECK(set.roots[1] == Complex(0.25, 1.0));
  CHECK(set.roots[2] == Complex(0.5, 0.0));
}

TEST_CASE("solver argument checks") {
  const ChainParams<Complex> params{1, 1, Complex(3.5), Complex(-2.25)};
  CHECK(solve_bethe(0, params).roots.magnons() == 0);
  CHECK_THROWS_AS(solve_bethe(3, params), ConfigError);
}
