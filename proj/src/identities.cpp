#include "openq/identities.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "openq/bethe.hpp"

namespace openq {
namespace {

constexpr double kIntegerTolerance = 1e-12;

bool near_integer(Complex z) {
  return std::abs(z.imag()) < kIntegerTolerance && std::abs(z.real() - std::round(z.real())) < kIntegerTolerance;
}

template <Scalar T>
T num(long v) {
  return from_ratio<T>(v);
}

template <Scalar T>
std::pair<T, T> fh_products(const std::vector<T>& roots, std::size_t i) {
  T pf(1);
  T ph(1);
  for (std::size_t j = 0; j < roots.size(); ++j) {
    if (j == i) continue;
    pf *= fcr_function(FcrFunction::kF, roots[i], roots[j]);
    ph *= fcr_function(FcrFunction::kH, roots[i], roots[j]);
  }
  return {pf, ph};
}

// Σ_{k ≤ 2s} C(2s,k)(-1)^k (k+w)! / [P(P+1)…(P+k+w)], which is the binomial
// sum with Γ(P)/Γ(P+k+w+1) written as a finite product.
template <Scalar T>
T binom_lhs(int w, int twice_s, const T& big_p) {
  T total{};
  T binom(1);
  for (int k = 0; k <= twice_s; ++k) {
    if (k > 0) binom *= from_ratio<T>(twice_s - k + 1, k);
    T term = binom;
    for (int l = 1; l <= k + w; ++l) term *= num<T>(l);
    for (int l = 0; l <= k + w; ++l) term *= checked_inverse(T(big_p + num<T>(l)), "binomial gamma sum");
    if (k % 2 == 1) term = -term;
    total += term;
  }
  return total;
}

template <Scalar T>
T binom_rhs(int w, int twice_s, const T& big_p) {
  T out(1);
  for (int l = 1; l <= w; ++l) out *= num<T>(l);
  for (int l = 0; l <= w; ++l) out *= checked_inverse(T(big_p + num<T>(twice_s + l)), "binomial gamma sum");
  return out;
}

}  // namespace

Complex complex_gamma(Complex z) {
  if (near_integer(z) && z.real() < 0.5) throw PoleError("Gamma function pole at a non-positive integer");
  if (z.real() < 0.5) {
    const Complex pi(std::numbers::pi, 0.0);
    return pi / (std::sin(pi * z) * complex_gamma(1.0 - z));
  }
  static constexpr std::array<double, 9> kCoeff{0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                                771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                                -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  z -= 1.0;
  Complex a = kCoeff[0];
  const Complex t = z + 7.5;
  for (std::size_t k = 1; k < kCoeff.size(); ++k) a += kCoeff[k] / (z + static_cast<double>(k));
  return std::sqrt(2 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

MagicGammaResult magic_gamma_sum(Complex alpha, Complex beta, std::size_t n_terms, Summation summation) {
  if (near_integer(alpha)) throw PoleError("magic gamma sum: alpha must not be an integer");
  // Γ(β+n+1)/Γ(β+1) is a rising factorial; only Γ(β+1) itself can blow up.
  if (near_integer(beta) && beta.real() < -0.5) throw PoleError("magic gamma sum: beta is a negative integer");
  if (std::abs(1.0 + alpha + beta) < kIntegerTolerance) throw PoleError("magic gamma sum: 1+alpha+beta = 0");
  if (n_terms == 0) throw ConfigError("magic gamma sum: need at least one term");

  MagicGammaResult out;
  out.closed = complex_gamma(1.0 + alpha) / (1.0 + alpha + beta);
  out.decay_exponent = (alpha + beta).real();
  out.divergent = summation == Summation::kPlain && out.decay_exponent >= -1.0;
  out.terms = n_terms;

  Complex term = complex_gamma(alpha);
  Complex last_term = term;
  Complex partial = 0.0;
  Complex cesaro = 0.0;
  for (std::size_t n = 0; n < n_terms; ++n) {
    partial += term;
    cesaro += partial;
    last_term = term;
    const double nn = static_cast<double>(n);
    const Complex ratio = -(beta + nn + 1.0) / (alpha - nn - 1.0);
    out.empirical_exponent = nn * (std::abs(ratio) - 1.0);
    term *= ratio;
  }
  if (summation == Summation::kCesaro) {
    out.partial = cesaro / static_cast<double>(n_terms);
    out.extrapolated = out.partial;
    return out;
  }
  out.partial = partial;
  // Euler-Maclaurin tail of tₙ ~ C n^γ: Σ_{n>N} ≈ t_N (N/(-γ-1) - ½).
  if (!out.divergent) {
    const double last = static_cast<double>(n_terms - 1);
    out.tail = last_term * (last / (-(alpha + beta) - 1.0) - 0.5);
  }
  out.extrapolated = partial + out.tail;
  return out;
}

bool osc_product_identity(std::size_t n, std::size_t k, std::size_t cutoff) {
  if (cutoff == 0) cutoff = n + k;
  if (cutoff < n + k) throw ConfigError("osc_product_identity: cutoff must be at least n+k");
  const auto fock = build_fock<Rational>(cutoff);
  Matrix<Rational> lhs = Matrix<Rational>::identity(fock.dim());
  for (std::size_t r = 0; r < n; ++r) lhs = lhs * fock.a;
  for (std::size_t r = 0; r < n; ++r) lhs = lhs * fock.adag;
  for (std::size_t row = 0; row <= k; ++row) {
    Rational expected(1);
    for (std::size_t l = 1; l <= n; ++l) expected *= Rational(static_cast<long>(row + l));
    for (std::size_t col = 0; col <= k; ++col) {
      const Rational want = row == col ? expected : Rational(0);
      if (!(lhs(row, col) == want)) return false;
    }
  }
  return true;
}

HypSumResult trace_hyp_sum(int k_tot, int m, Complex p, Complex q, Complex x, const SeriesOptions& options) {
  if (k_tot < 0 || m < 0) throw ConfigError("trace_hyp_sum: k and m must be non-negative");
  const Complex z = -p - x + 2.0 * m;
  const Complex big_p = p + q - 2.0 * m;
  if (near_integer(z)) throw PoleError("trace_hyp_sum: -p-x+2m is an integer");

  HypSumResult out;
  Complex rhs = k_tot % 2 == 1 ? 1.0 : -1.0;
  for (int l = 1; l <= k_tot; ++l) rhs *= static_cast<double>(l);
  for (int l = 0; l <= k_tot; ++l) rhs = checked_divide(rhs, Complex(big_p + static_cast<double>(l)), "trace_hyp_sum");
  out.rhs = rhs;

  // t_k = k! / ∏_{l=1}^{k+1}(z-l); later terms from the ratio t_{n+1}/t_n.
  Complex term = 1.0;
  for (int l = 1; l <= k_tot; ++l) term *= static_cast<double>(l);
  for (int l = 1; l <= k_tot + 1; ++l) term /= (z - static_cast<double>(l));

  const auto k = static_cast<std::size_t>(k_tot);
  Complex partial = 0.0;
  Complex last_term = 0.0;
  std::vector<double> norms;
  // Decay exponent from the last term against the one at half the range.
  auto decay = [&] {
    const std::size_t count = norms.size();
    const double last = static_cast<double>(k + count);
    const double mid = static_cast<double>(k + count / 2);
    if (count < 8 || norms[count / 2 - 1] <= 0.0) return 0.0;
    return std::log(norms.back() / norms[count / 2 - 1]) / std::log(last / mid);
  };
  double gamma = 0.0;
  for (std::size_t n = k; n < k + options.max_terms; ++n) {
    partial += term;
    last_term = term;
    norms.push_back(std::abs(term));
    const double nn = static_cast<double>(n);
    const double free = nn - static_cast<double>(k);
    term *= (q - x - free - 1.0) * (nn + 1.0) / ((z - nn - 2.0) * (free + 1.0));
    if (norms.size() % 64 == 0) {
      gamma = decay();
      const double bound = norms.back() * (nn + 1.0) / std::max(1e-300, std::abs(gamma + 1.0));
      if (gamma < -1.0 && bound < options.tail_tolerance * std::max(1.0, std::abs(partial))) break;
    }
  }
  gamma = decay();
  out.terms = norms.size();
  out.decay_exponent = gamma;
  if (gamma >= -1.0) throw ConvergenceError("trace_hyp_sum: summands decay no faster than 1/n");
  // Euler-Maclaurin tail of a power law: Σ_{n>N} n^γ ≈ N^{γ+1}/(-γ-1) - N^γ/2.
  const double last = static_cast<double>(k + norms.size());
  out.tail = last_term * (last / (-gamma - 1.0) - 0.5);
  out.lhs = partial + out.tail;
  // The extrapolated tail is accurate to about tail/N.
  out.converged = std::abs(out.tail) / static_cast<double>(norms.size()) < 1e-8 * std::max(1.0, std::abs(out.lhs));
  return out;
}

double trace_hyp_x_spread(int k_tot, int m, Complex p, Complex q, const std::vector<Complex>& xs,
                          const SeriesOptions& options) {
  if (xs.empty()) return 0.0;
  const Complex ref = trace_hyp_sum(k_tot, m, p, q, xs.front(), options).lhs;
  double spread = 0.0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const Complex v = trace_hyp_sum(k_tot, m, p, q, xs[k], options).lhs;
    spread = std::max(spread, std::abs(v - ref) / std::max(1.0, std::abs(ref)));
  }
  return spread;
}

template <Scalar T>
std::pair<T, T> binom_gamma_sum(int w, int twice_s, int m, const T& p, const T& q) {
  if (w < 0 || twice_s < 0 || m < 0) throw ConfigError("binom_gamma_sum: w, 2s and m must be non-negative");
  const T big_p = p + q - num<T>(2L * m);
  return {binom_lhs(w, twice_s, big_p), binom_rhs(w, twice_s, big_p)};
}

template <Scalar T>
NestedNormalization<T> nested_normalization(int n_sites, int twice_s, int m, const T& p, const T& q) {
  if (n_sites < 1 || twice_s < 0 || m < 0) throw ConfigError("nested_normalization: invalid chain shape");
  const T big_p = p + q - num<T>(2L * m);
  NestedNormalization<T> out;

  // Direct: -Σ_{k₁…k_N} ∏C(2s,k_j) (-1)^{k_tot} k_tot! Γ(P)/Γ(P+k_tot+1).
  std::vector<int> ks(static_cast<std::size_t>(n_sites), 0);
  T direct{};
  while (true) {
    int k_tot = 0;
    T weight(1);
    for (int kj : ks) {
      k_tot += kj;
      T binom(1);
      for (int r = 1; r <= kj; ++r) binom *= from_ratio<T>(twice_s - r + 1, r);
      weight *= binom;
    }
    for (int l = 1; l <= k_tot; ++l) weight *= num<T>(l);
    for (int l = 0; l <= k_tot; ++l) weight *= checked_inverse(T(big_p + num<T>(l)), "nested normalisation");
    if (k_tot % 2 == 1) weight = -weight;
    direct -= weight;
    std::size_t pos = 0;
    while (pos < ks.size() && ks[pos] == twice_s) ks[pos++] = 0;
    if (pos == ks.size()) break;
    ++ks[pos];
  }
  out.direct = direct;

  // Successive: collapse the last site with w = k₁+…+k_{N-1}; each step
  // shifts P by 2s and leaves the same shape one site shorter.
  std::vector<T> layer;
  const int max_w = n_sites * twice_s;
  for (int w = 0; w <= max_w; ++w) {
    T f(1);
    for (int l = 1; l <= w; ++l) f *= num<T>(l);
    for (int l = 0; l <= w; ++l) f *= checked_inverse(T(big_p + num<T>(l)), "nested normalisation");
    layer.push_back(f);
  }
  for (int site = 0; site < n_sites; ++site) {
    std::vector<T> next;
    const int top = (n_sites - site - 1) * twice_s;
    for (int w = 0; w <= top; ++w) {
      T sum{};
      T binom(1);
      for (int k = 0; k <= twice_s; ++k) {
        if (k > 0) binom *= from_ratio<T>(twice_s - k + 1, k);
        T term = binom * layer[static_cast<std::size_t>(w + k)];
        if (k % 2 == 1) term = -term;
        sum += term;
      }
      next.push_back(sum);
    }
    layer = std::move(next);
  }
  out.successive = -layer.at(0);
  out.closed = checked_inverse(T(num<T>(2L * m) - p - q - num<T>(static_cast<long>(n_sites) * twice_s)),
                               "normalisation 2m-p-q-2Ns");
  return out;
}

template <Scalar T>
T magic_sum_open(const std::vector<T>& roots, const T& x0, const T& p) {
  const T one(1);
  const T two = num<T>(2);
  const T n = num<T>(static_cast<long>(roots.size()));
  T total{};
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const T& xi = roots[i];
    const auto [pf, ph] = fh_products(roots, i);
    const T numer = (p + xi) * (xi - x0 - one) * pf + (p - xi - one) * (xi + x0 + two) * ph;
    total += checked_divide(numer, T((one + two * xi) * (p - x0 - n - one)), "magic sum");
  }
  return total;
}

template <Scalar T>
T secsum(const std::vector<T>& roots) {
  const T one(1);
  const T two = num<T>(2);
  T total{};
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const T& xi = roots[i];
    const auto [pf, ph] = fh_products(roots, i);
    total += checked_divide(T(pf * xi + ph * (one + xi)), T(one + two * xi), "secsum");
  }
  return total;
}

template <Scalar T>
PartialFractions<T> partial_fraction_check(const std::vector<T>& roots, const T& x) {
  const T one(1);
  const T two = num<T>(2);
  PartialFractions<T> out{T(1), T(1), T(1), T(1)};
  for (const auto& xi : roots) {
    out.f_lhs *= fcr_function(FcrFunction::kF, x, xi);
    out.h_lhs *= fcr_function(FcrFunction::kH, x, xi);
  }
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const T& xi = roots[i];
    const auto [pf, ph] = fh_products(roots, i);
    const T wa = checked_divide(T(two * xi), T(one + two * xi), "partial fractions") * pf;
    const T wd = checked_divide(T(two * (one + xi)), T(one + two * xi), "partial fractions") * ph;
    out.f_rhs -= checked_divide(wa, T(x - xi), "partial fractions") +
                 checked_divide(wd, T(x + xi + one), "partial fractions");
    out.h_rhs += checked_divide(wa, T(x + xi + one), "partial fractions") +
                 checked_divide(wd, T(x - xi), "partial fractions");
  }
  return out;
}

#define OPENQ_INSTANTIATE(T)                                                                          \
  template std::pair<T, T> binom_gamma_sum<T>(int, int, int, const T&, const T&);                     \
  template NestedNormalization<T> nested_normalization<T>(int, int, int, const T&, const T&);         \
  template T magic_sum_open<T>(const std::vector<T>&, const T&, const T&);                            \
  template T secsum<T>(const std::vector<T>&);                                                        \
  template PartialFractions<T> partial_fraction_check<T>(const std::vector<T>&, const T&);

OPENQ_INSTANTIATE(Rational)
OPENQ_INSTANTIATE(Complex)

#undef OPENQ_INSTANTIATE

}  // namespace openq
