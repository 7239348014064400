#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "openq/lattice.hpp"

namespace openq {

/// Γ(z) for complex z (Lanczos, reflection for Re z < ½). Raises PoleError
/// at non-positive integers.
Complex complex_gamma(Complex z);

struct SeriesOptions {
  /// Hard cap on the number of terms.
  std::size_t max_terms = 100000;
  Summation summation = Summation::kPlain;
  /// Stop early once the estimated tail falls below this, relative to the sum.
  double tail_tolerance = 1e-16;
};

struct MagicGammaResult {
  /// Plain or Cesàro partial sum.
  Complex partial;
  /// Plain partial sum plus the power-law tail Σ_{n>N} tₙ (plain summation
  /// only; equals `partial` under Cesàro averaging).
  Complex extrapolated;
  Complex tail;
  Complex closed;
  std::size_t terms = 0;
  /// Re(α+β): the summands decay like n^{α+β} without alternating.
  double decay_exponent = 0.0;
  /// The same exponent read off the last term ratio, n(|tₙ₊₁/tₙ| - 1).
  double empirical_exponent = 0.0;
  /// Plain summation outside Re(α+β) < -1.
  bool divergent = false;
};

/// Σₙ (-1)ⁿ Γ(α-n)Γ(β+n+1)/Γ(β+1) summed to `n_terms`, against Γ(1+α)/(1+α+β).
/// α must not be an integer and β not a negative integer.
MagicGammaResult magic_gamma_sum(Complex alpha, Complex beta, std::size_t n_terms,
                                 Summation summation = Summation::kPlain);

/// Checks aⁿāⁿ = Γ(N+n+1)/Γ(N+1) exactly on number states 0..k. The Fock
/// space is truncated at `cutoff` (0 picks n+k, the smallest valid one).
bool osc_product_identity(std::size_t n, std::size_t k, std::size_t cutoff = 0);

struct HypSumResult {
  Complex lhs;
  Complex rhs;
  std::size_t terms = 0;
  /// Empirical decay exponent of the summands.
  double decay_exponent = 0.0;
  /// Power-law tail added to the partial sum.
  Complex tail;
  bool converged = false;
};

/// Σ_{n≥k} Γ(-p-x+2m-n-1)Γ(q-x)Γ(n+1) / [Γ(-p-x+2m)Γ(q-x-n+k)Γ(n-k+1)]
/// against -(-1)^k k! Γ(p+q-2m)/Γ(p+q-2m+k+1).
HypSumResult trace_hyp_sum(int k_tot, int m, Complex p, Complex q, Complex x, const SeriesOptions& options = {});

/// Largest relative spread of trace_hyp_sum's LHS over the given x values.
double trace_hyp_x_spread(int k_tot, int m, Complex p, Complex q, const std::vector<Complex>& xs,
                          const SeriesOptions& options = {});

/// Σ_{k≤2s} C(2s,k)(-1)^k (k+w)! Γ(P)/Γ(P+k+w+1) and Γ(w+1)Γ(P+2s)/Γ(P+2s+w+1),
/// P = p+q-2m.
template <Scalar T>
std::pair<T, T> binom_gamma_sum(int w, int twice_s, int m, const T& p, const T& q);

template <Scalar T>
struct NestedNormalization {
  /// The full N-fold sum over k₁…k_N.
  T direct;
  /// The same sum collapsed one site at a time with binom_gamma_sum.
  T successive;
  /// 1/(2m-p-q-2Ns)
  T closed;
};

template <Scalar T>
NestedNormalization<T> nested_normalization(int n_sites, int twice_s, int m, const T& p, const T& q);

/// Σᵢ [(p+xᵢ)(xᵢ-x₀-1)∏f + (p-xᵢ-1)(xᵢ+x₀+2)∏h] / ((1+2xᵢ)(p-x₀-n-1)); equals n.
template <Scalar T>
T magic_sum_open(const std::vector<T>& roots, const T& x0, const T& p);

/// Σᵢ [xᵢ∏f + (1+xᵢ)∏h]/(1+2xᵢ); equals n.
template <Scalar T>
T secsum(const std::vector<T>& roots);

template <Scalar T>
struct PartialFractions {
  T f_lhs;
  T f_rhs;
  T h_lhs;
  T h_rhs;
};

/// Both sides of the partial-fraction expansions of ∏f(x,xᵢ) and ∏h(x,xᵢ).
template <Scalar T>
PartialFractions<T> partial_fraction_check(const std::vector<T>& roots, const T& x);

}  // namespace openq
