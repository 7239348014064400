#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "openq/lattice.hpp"

namespace openq {

/// The exchange-relation functions f, h, g_A, g_D̃, k_A, k_D̃ and the
/// [C, B] coefficients l_D̃D̃, l_AA, m_AA, m_AD̃, l_AD̃, l_D̃A.
enum class FcrFunction { kF, kH, kGA, kGD, kKA, kKD, kLDD, kLAA, kMAA, kMAD, kLAD, kLDA };

std::string_view fcr_function_id(FcrFunction f);
FcrFunction parse_fcr_function(std::string_view id);

template <Scalar T>
T fcr_function(FcrFunction f, const T& x, const T& y);

template <Scalar T>
Vector<T> reference_state(const ChainParams<T>& params);

/// α(x) = (q+x)(x+½+s)^{2N}
template <Scalar T>
T alpha(const T& x, const ChainParams<T>& params);

/// δ̃(x) = 2x/(2x+1) (q-x-1)(x+½-s)^{2N}
template <Scalar T>
T delta_tilde(const T& x, const ChainParams<T>& params);

/// B(x₁)…B(x_m)|Ω>. Returns the zero vector once m exceeds 2Ns.
template <Scalar T>
Vector<T> offshell_state(const std::vector<T>& roots, const ChainParams<T>& params);

/// Wanted-term eigenvalue t(x) of the transfer matrix.
template <Scalar T>
T t_eigenvalue(const T& x, const std::vector<T>& roots, const ChainParams<T>& params);

/// q_m(x) = ∏(x-x_k)(x+x_k+1).
template <Scalar T>
T q_polynomial(const T& x, const std::vector<T>& roots);

/// q_m(x)/(2m-p-q-2Ns); a vanishing normalisation raises PoleError.
template <Scalar T>
T q_eigenvalue(const T& x, const std::vector<T>& roots, const ChainParams<T>& params);

/// Coefficients of the A, D̃ and C actions on off-shell states and the
/// unwanted-term coefficients 𝓖ⁿ. Roots are indexed from 0; index 0 plays
/// the role of the distinguished root x₁.
template <Scalar T>
class CoefficientContext {
 public:
  using Index = std::size_t;
  using IndexSet = std::vector<Index>;

  CoefficientContext(std::vector<T> roots, ChainParams<T> params);

  const std::vector<T>& roots() const { return roots_; }
  const ChainParams<T>& params() const { return params_; }
  /// All root indices 0..m-1.
  IndexSet all() const;
  /// All root indices except 0.
  IndexSet rest() const;

  /// Replaces δ̃(x_k) by the value forced by G_k = 0:
  /// (p+x_k)/(p-x_k-1) 𝓐_k^I / ∏_{l≠k} h(x_k, x_l).
  void use_on_shell_delta();
  T delta(Index k) const;

  /// 𝓐_k^J = 2x_k α(x_k)/(1+2x_k) ∏_{j∈J∖k} f(x_k, x_j)
  T a(Index k, const IndexSet& j) const;
  /// 𝓓̃_k^J = δ̃(x_k) ∏_{j∈J∖k} h(x_k, x_j)
  T dt(Index k, const IndexSet& j) const;
  T a2(Index k, Index l, const IndexSet& j) const;
  T dt2(Index k, Index l, const IndexSet& j) const;
  /// 𝓒_{1,j}^J
  T c1(Index j, const IndexSet& set) const;
  /// 𝓒_{1,j,k}^J in two algebraically equivalent forms.
  T c2_t(Index j, Index k, const IndexSet& set) const;
  T c2_s(Index j, Index k, const IndexSet& set) const;

  /// G_j^I = (p+x_j)𝓐_j^I - (p-x_j-1)𝓓̃_j^I over all roots.
  T bethe_g(Index j) const;

  /// 𝓖ⁿ(i, J, J') from the recursion with its n = 0, 1 initial conditions.
  T g_recursive(int n, int i, const IndexSet& set, const IndexSet& sub) const;
  /// 𝓖ⁿ(i, J, J') as a permutation sum over J'.
  T g_closed(int n, int i, const IndexSet& set, const IndexSet& sub) const;
  /// The rewritten 𝓖ⁿ(0, I₁, J') in terms of 𝓧_n(x₁) - 𝓧_n(-x₁-1); equals
  /// g_closed(n, 0, rest(), sub) once δ̃ is on shell.
  T g_altform(const IndexSet& sub) const;
  /// The A-part and D̃-part of g_altform separately.
  std::pair<T, T> g_altform_parts(const IndexSet& sub) const;
  /// The A-part and D̃-part of g_closed separately.
  std::pair<T, T> g_closed_parts(int n, int i, const IndexSet& set, const IndexSet& sub) const;

 private:
  void check_subset(const IndexSet& set, const IndexSet& sub) const;
  T f(Index k, Index j) const;
  T h(Index k, Index j) const;

  std::vector<T> roots_;
  ChainParams<T> params_;
  std::vector<T> delta_;
};

/// 𝓧_n(x₁) for the roots `sub` (all of them, n = sub.size()); equals n!.
template <Scalar T>
T x_n_sum(const std::vector<T>& sub, const T& x1, const T& p);

/// The root list of a Bethe solution, canonicalised so that each root is
/// the member of {x, -x-1} with Re x > -½ (Im ≥ 0 on the line), sorted by
/// real part then imaginary part.
struct RootSet {
  std::vector<Complex> roots;
  std::size_t magnons() const { return roots.size(); }
};

RootSet canonicalize(std::vector<Complex> roots);

enum class SeedStrategy { kLargeBoundary, kRandomDisk, kHomotopy };

std::string_view seed_strategy_id(SeedStrategy s);

struct SolveOptions {
  std::uint64_t seed = 1;
  int random_starts = 64;
  int max_iterations = 200;
  /// Acceptance threshold on max_j |G_j|, relative to max(1, |(p+x_j)𝓐_j|).
  double tolerance = 1e-10;
  int threads = 1;
  /// Starting point for the p-homotopy strategy: a solution at p = p_start.
  std::optional<RootSet> homotopy_roots;
  std::optional<Complex> homotopy_p_start;
};

struct SolveReport {
  RootSet roots;
  /// max_j |G_j|
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  SeedStrategy strategy = SeedStrategy::kLargeBoundary;
  int start_index = 0;
};

/// G_j for every root (float backend).
std::vector<Complex> bethe_residual(const RootSet& roots, const ChainParams<Complex>& params);

/// One solution, from the first seed strategy that produces any convergent
/// start; within that strategy the smallest residual wins.
SolveReport solve_bethe(int magnons, const ChainParams<Complex>& params, const SolveOptions& options = {});

/// Every distinct physical solution reached by any start, in canonical order.
std::vector<SolveReport> solve_bethe_all(int magnons, const ChainParams<Complex>& params,
                                         const SolveOptions& options = {});

}  // namespace openq
