#include <random>

#include "doctest.h"
#include "openq/bethe.hpp"
#include "openq/lattice.hpp"
#include "openq/verify.hpp"

using namespace openq;

namespace {

using R = Rational;

Vector<Complex> basis_vector(std::size_t dim, std::size_t k) {
  Vector<Complex> v(dim);
  v[k] = 1.0;
  return v;
}

// max_k |M v - λ v| relative to |λ|.
double eigen_defect(const Matrix<Complex>& m, const Vector<Complex>& v, Complex lambda) {
  const auto mv = m.apply(v);
  double worst = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) worst = std::max(worst, std::abs(mv[k] - lambda * v[k]));
  return worst / std::abs(lambda);
}

double relative_commutator(const Matrix<Complex>& a, const Matrix<Complex>& b) {
  return max_abs(commutator(a, b)) / (max_abs(a) * max_abs(b));
}

const ChainParams<Complex> kFloatChain{2, 1, Complex(37.0 / 4), Complex(29.0 / 4)};

}  // namespace

TEST_CASE("R-matrix at x = 0 and x = 1") {
  const auto r0 = r_matrix(R(0));
  Matrix<R> perm(4, 4);
  perm(0, 0) = perm(1, 2) = perm(2, 1) = perm(3, 3) = R(1);
  CHECK(r0 == perm);
  const auto r1 = r_matrix(R(1));
  CHECK(r1(0, 0) == R(2));
  CHECK(r1(3, 3) == R(2));
  CHECK(r1(1, 1) == R(1));
  CHECK(r1(1, 2) == R(1));
  CHECK(r1(2, 1) == R(1));
  CHECK(r1(2, 2) == R(1));
}

TEST_CASE("R(x)R(-x) = (1+x)(1-x) Id") {
  for (const R x : {R(1, 3), R(-7, 5), R(11, 2)}) {
    CHECK(r_matrix(x) * r_matrix(R(-x)) == Matrix<R>::identity(4) * ((R(1) + x) * (R(1) - x)));
  }
}

TEST_CASE("spin Lax operator") {
  const auto rep = build_spin_rep<R>(1);
  const auto l = lax_fundamental(R(-1, 2), rep);
  CHECK(l.block(0, 0, 2, 2) == rep.s3);
  CHECK(l.block(0, 2, 2, 2) == rep.sm);
  CHECK(l.block(2, 0, 2, 2) == rep.sp);
  CHECK(l.block(2, 2, 2, 2) == -rep.s3);

  const R x(2, 7);
  const auto unit = lax_fundamental(x, rep) * lax_fundamental(R(-x), rep);
  CHECK(unit == Matrix<R>::identity(4) * (R(1, 4) - x * x + R(3, 4)));

  for (int ts = 1; ts <= 3; ++ts) {
    const auto r = build_spin_rep<R>(ts);
    const auto lx = lax_fundamental(x, r);
    CHECK(lx(0, 0) == x + R(1, 2) + R(ts, 2));
  }
}

TEST_CASE("oscillator Lax operators") {
  const auto fock = build_fock<R>(5);
  const R x(3, 11);
  const auto l = lax_osc(x, fock);
  const auto lb = lax_osc_bar(x, fock);
  const std::size_t d = fock.dim();
  for (std::size_t n = 0; n < d; ++n) {
    CHECK(l(d + n, d + n) == x + R(1) + R(static_cast<long>(n)));
    CHECK(lb(n, n) == x - R(static_cast<long>(n)));
  }
  // lax_q is ordered Fock⊗C², lax_osc C²⊗Fock. The top number state is
  // skipped: a·ā is truncated there.
  const auto lq = lax_q(x, fock, build_spin_rep<R>(1));
  REQUIRE(lq.rows() == 2 * d);
  bool same = true;
  for (std::size_t n = 0; n + 1 < d; ++n) {
    for (std::size_t m = 0; m + 1 < d; ++m) {
      for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t j = 0; j < 2; ++j) same = same && lq(2 * n + k, 2 * m + j) == l(k * d + n, j * d + m);
      }
    }
  }
  CHECK(same);
}

TEST_CASE("spin-1 oscillator Lax operator has polynomial entries") {
  // 𝓡(x) at 2s = 2: the S₃ = -1 diagonal entry is (x+½+N+1)(x+½+N) after the
  // shift in the displayed form; on |0) at the lowest weight it is (x+3/2)(x+1/2).
  const auto fock = build_fock<R>(6);
  const auto rep = build_spin_rep<R>(2);
  const R x(2, 9);
  const auto l = lax_q(x, fock, rep);
  REQUIRE(l.rows() == fock.dim() * 3);
  // Row/column index n·3 + k: number state n, spin basis k.
  CHECK(l(2, 2) == (x + R(3, 2)) * (x + R(1, 2)));
  CHECK(l(0, 0) == R(1));
}

TEST_CASE("boundary K-matrices") {
  const R p(37, 4), q(29, 4), x(1, 3);
  CHECK(k_left(R(0), p) == Matrix<R>::diagonal({p + R(1), p - R(1)}));
  const auto fock = build_fock<R>(4);
  const auto kl = k_osc_left(x, p, fock);
  const auto kr = k_osc_right(x, q, fock);
  CHECK(kl(0, 0) == R(1) / (-p - x - R(1)));
  CHECK(kr(0, 0) == R(1));
  CHECK(kr(1, 1) == q - x - R(1));
}

TEST_CASE("double-row blocks on the reference state") {
  const ChainParams<R> one{1, 1, R(7, 2), R(-9, 4)};
  const R x(2, 5);
  const auto u = double_row_blocks(x, one);
  const auto omega = reference_state(one);
  const auto a_omega = u.a.apply(omega);
  CHECK(a_omega[0] == (one.q + x) * (x + R(1)) * (x + R(1)));
  CHECK(a_omega[1] == R(0));
  CHECK(alpha(x, one) == (one.q + x) * (x + R(1)) * (x + R(1)));

  for (const ChainParams<R>& params : {ChainParams<R>{2, 1, R(5, 3), R(-7, 4)}, ChainParams<R>{2, 2, R(3, 7), R(9, 5)}}) {
    const auto blocks = double_row_blocks(x, params);
    const auto om = reference_state(params);
    const auto c_om = blocks.c.apply(om);
    const auto dt_om = blocks.d_tilde(x).apply(om);
    const auto al_om = blocks.a.apply(om);
    const R al = alpha(x, params), dl = delta_tilde(x, params);
    for (std::size_t k = 0; k < om.size(); ++k) {
      CHECK(c_om[k] == R(0));
      CHECK(al_om[k] == al * om[k]);
      CHECK(dt_om[k] == dl * om[k]);
    }
  }
}

TEST_CASE("2s = 1 δ̃ carries x^{2N}") {
  const ChainParams<R> params{3, 1, R(5, 2), R(1, 3)};
  const R x(4, 7);
  CHECK(delta_tilde(x, params) == R(2) * x / (R(2) * x + R(1)) * (params.q - x - R(1)) * ipow(x, 6));
}

TEST_CASE("transfer matrix") {
  const ChainParams<R> params{2, 1, R(5, 3), R(-7, 4)};
  const R x(1, 3), y(-2, 7);
  const auto t = transfer(x, params);
  CHECK(t == transfer_split(x, params));
  CHECK(commutator(t, transfer(y, params)).is_zero());
  const R expect = R(2) * (R(1) + x) * (params.p + x) / (R(1) + R(2) * x) * alpha(x, params) +
                   (params.p - x - R(1)) * delta_tilde(x, params);
  CHECK(t(0, 0) == expect);
  for (std::size_t r = 1; r < t.rows(); ++r) CHECK(t(r, 0) == R(0));
}

TEST_CASE("[T(x),T(y)] = 0 exactly for N <= 3, 2s <= 2") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 3; ++n) {
    for (int ts = 1; ts <= 2; ++ts) {
      const ChainParams<R> params{n, ts, random_rational(rng), random_rational(rng)};
      const R x = random_rational(rng), y = random_rational(rng);
      CAPTURE(n);
      CAPTURE(ts);
      CHECK(commutator(transfer(x, params), transfer(y, params)).is_zero());
    }
  }
}

TEST_CASE("Q on the reference state") {
  const Complex x(1.0 / 3);
  const auto q = q_operator(x, kFloatChain, 48);
  CHECK(q.report.converged);
  CHECK(q.report.domain_ok);
  const Complex expect = 1.0 / (-kFloatChain.p - kFloatChain.q - 2.0);
  CHECK(eigen_defect(q.value, basis_vector(4, 0), expect) < 1e-10);
}

TEST_CASE("[T,Q] and [Q,Q] shrink with the cutoff") {
  const Complex x(1.0 / 3), y(0.4);
  const auto t = to_complex(transfer(y, kFloatChain));
  std::vector<double> tq;
  for (std::size_t cutoff : {8, 16, 32, 48}) tq.push_back(relative_commutator(t, q_operator(x, kFloatChain, cutoff).value));
  CHECK(tq[1] < tq[0]);
  CHECK(tq[2] < tq[1]);
  CHECK(tq[3] < 1e-9);
  const auto qx = q_operator(x, kFloatChain, 48).value;
  const auto qy = q_operator(y, kFloatChain, 48).value;
  CHECK(relative_commutator(qx, qy) < 1e-9);
}

TEST_CASE("Q and W do not mix magnon sectors") {
  const ChainParams<Complex> params{2, 2, Complex(37.0 / 4), Complex(29.0 / 4)};
  const auto magnons = magnon_numbers(2, 2);
  const auto q = q_operator(Complex(0.3), params, 24).value;
  const auto w = w_op(2, 1, Complex(0.3), params, 24).value;
  double leak_q = 0.0, leak_w = 0.0;
  for (std::size_t r = 0; r < q.rows(); ++r) {
    for (std::size_t c = 0; c < q.cols(); ++c) {
      if (magnons[r] == magnons[c]) continue;
      leak_q = std::max(leak_q, std::abs(q(r, c)));
      // ā^j raises the number, which W_{i,j} trades for j magnons.
      if (magnons[r] != magnons[c] + 1) leak_w = std::max(leak_w, std::abs(w(r, c)));
    }
  }
  CHECK(leak_q < 1e-12);
  CHECK(leak_w < 1e-12);
}

TEST_CASE("Q- on the lowest-weight state and its spin-flip form") {
  const ChainParams<Complex> params{2, 1, Complex(-37.0 / 4), Complex(-29.0 / 4)};
  const Complex x(1.0 / 3);
  const auto qm = q_minus(x, params, 48);
  const Complex expect = 1.0 / (params.p + params.q - 2.0);
  CHECK(eigen_defect(qm.value, basis_vector(4, 3), expect) < 1e-10);
  CHECK(relative_commutator(to_complex(transfer(Complex(0.4), params)), qm.value) < 1e-9);

  for (int ts = 1; ts <= 2; ++ts) {
    const ChainParams<Complex> chain{2, ts, params.p, params.q};
    const auto j = global_spin_flip<Complex>(2, ts);
    const auto flipped = q_minus(x, chain, 16).value;
    const auto plain = q_operator(x, chain.negated(), 16).value;
    CHECK(max_abs(Matrix<Complex>(j * plain - flipped * j)) < 1e-12 * max_abs(plain));
  }
}

TEST_CASE("W_{0,0} is Q and W_{2m,0} has the vacuum eigenvalue") {
  const Complex x(1.0 / 3);
  const auto q = q_operator(x, kFloatChain, 32).value;
  const auto w = w_op(0, 0, x, kFloatChain, 32).value;
  CHECK(max_abs(Matrix<Complex>(q - w)) < 1e-13 * max_abs(q));

  for (int m = 0; m <= 2; ++m) {
    const Complex expect = 1.0 / (2.0 * m - kFloatChain.p - kFloatChain.q - 2.0);
    for (const Complex xs : {Complex(1.0 / 3), Complex(0.4), Complex(-0.2, 0.3)}) {
      CHECK(eigen_defect(w_op(2 * m, 0, xs, kFloatChain, 48).value, basis_vector(4, 0), expect) < 1e-9);
    }
  }
}

TEST_CASE("unshifted W normalisation is a rescaling") {
  const Complex x(0.3);
  const OscillatorTrace<Complex> tr(x, kFloatChain, 24);
  for (int i = 0; i <= 2; ++i) {
    const auto shifted = tr.w(i, 1, WNormalization::kShifted).value;
    const auto unshifted = tr.w(i, 1, WNormalization::kUnshifted).value;
    const Complex factor = -kFloatChain.p - x + static_cast<double>(i);
    CHECK(max_abs(Matrix<Complex>(unshifted - shifted * factor)) < 1e-12 * max_abs(unshifted));
  }
}

TEST_CASE("X on the reference state only sees A and D-tilde") {
  const ChainParams<Complex> params{1, 2, Complex(37.0 / 4), Complex(29.0 / 4)};
  const Complex x(0.3), y(-0.15);
  const auto omega = basis_vector(3, 0);
  const Complex al = alpha(y, params), dl = delta_tilde(y, params);
  for (int i = 0; i <= 2; ++i) {
    const auto xo = x_op(i, 0, x, y, params, 32).apply(omega);
    const double id = static_cast<double>(i);
    const Complex coeff = (params.p + y - id) * 2.0 * y / (1.0 + 2.0 * y) * al - (params.p - y - 1.0 - id) * dl;
    const auto expect = w_op(i + 1, 1, x, params, 32).value.apply(omega);
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      worst = std::max(worst, std::abs(xo[k] + coeff * expect[k]));
      scale = std::max(scale, std::abs(xo[k]));
    }
    CHECK(worst <= 1e-12 * scale);
  }
}

TEST_CASE("invalid chain parameters") {
  CHECK_THROWS_AS((ChainParams<R>{0, 1, R(1), R(1)}.validate()), ConfigError);
  CHECK_THROWS_AS((ChainParams<R>{1, 0, R(1), R(1)}.validate()), ConfigError);
  CHECK_THROWS_AS(transfer_split(R(-1, 2), ChainParams<R>{1, 1, R(1), R(1)}), PoleError);
}
