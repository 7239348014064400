#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "openq/matrix.hpp"
#include "openq/repr.hpp"

namespace openq {

/// Chain length, spin and the two boundary parameters.
template <Scalar T>
struct ChainParams {
  int n_sites = 1;
  int twice_s = 1;
  T p{};
  T q{};

  void validate() const;
  T spin() const { return from_ratio<T>(twice_s, 2); }
  std::size_t site_dim() const { return static_cast<std::size_t>(twice_s) + 1; }
  std::size_t space_dim() const;
  /// Factor sizes of V = (C^{2s+1})^{⊗N}.
  std::vector<std::size_t> site_dims() const { return std::vector<std::size_t>(n_sites, site_dim()); }
  /// Same chain with p -> -p, q -> -q.
  ChainParams negated() const { return ChainParams{n_sites, twice_s, -p, -q}; }
};

template <Scalar T>
Matrix<T> r_matrix(const T& x);

/// [[x+½+S₃, S₋], [S₊, x+½-S₃]] on C²⊗V_site.
template <Scalar T>
Matrix<T> lax_fundamental(const T& x, const SpinRep<T>& rep);

/// L(x) = [[1, ā], [a, x+1+N]] on C²⊗Fock.
template <Scalar T>
Matrix<T> lax_osc(const T& x, const FockSpace<T>& fock);

/// L̄(x) = [[x-N, ā], [a, -1]] on C²⊗Fock.
template <Scalar T>
Matrix<T> lax_osc_bar(const T& x, const FockSpace<T>& fock);

/// 𝓡(x) = e^{a S₋} Γ(x+½-S₃)/Γ(x+½-s) e^{ā S₊} on Fock⊗V_site.
template <Scalar T>
Matrix<T> lax_q(const T& x, const FockSpace<T>& fock, const SpinRep<T>& rep);

/// diag(p+x+1, p-x-1)
template <Scalar T>
Matrix<T> k_left(const T& x, const T& p);

/// diag(q+x, q-x)
template <Scalar T>
Matrix<T> k_right(const T& x, const T& q);

/// diag_n Γ(-p-x-1-n)/Γ(-p-x)
template <Scalar T>
Matrix<T> k_osc_left(const T& x, const T& p, const FockSpace<T>& fock);

/// diag_n Γ(q-x)/Γ(q-x-n)
template <Scalar T>
Matrix<T> k_osc_right(const T& x, const T& q, const FockSpace<T>& fock);

/// The four quantum-space blocks of a double-row monodromy 𝓤(x).
template <Scalar T>
struct AuxBlockOperator {
  Matrix<T> a;
  Matrix<T> b;
  Matrix<T> c;
  Matrix<T> d;

  /// D̃(x) = D(x) - A(x)/(1+2x)
  Matrix<T> d_tilde(const T& x) const;
  /// The full operator on C²⊗V, auxiliary index leftmost.
  Matrix<T> assemble() const;
};

/// 𝓤(x) = 𝓜(x) 𝓚̂(x) 𝓜̂(x) on C²⊗V.
template <Scalar T>
Matrix<T> double_row(const T& x, const ChainParams<T>& params);

template <Scalar T>
AuxBlockOperator<T> double_row_blocks(const T& x, const ChainParams<T>& params);

/// U(x) = M(x) K̂(x) M̂(x) on Fock⊗V. `rep` defaults to the spin-s
/// representation of `params`; pass the flipped one for Q₋.
template <Scalar T>
Matrix<T> double_row_q(const T& x, const ChainParams<T>& params, const FockSpace<T>& fock,
                       const SpinRep<T>& rep);

/// T(x) = (p+x+1)A(x) + (p-x-1)D(x).
template <Scalar T>
Matrix<T> transfer(const T& x, const ChainParams<T>& params);

/// T(x) = 2(1+x)(p+x)/(1+2x) A(x) + (p-x-1) D̃(x); pole at x = -½.
template <Scalar T>
Matrix<T> transfer_split(const T& x, const ChainParams<T>& params);

/// Extra number states kept beyond the requested cutoff so that entries on
/// states ≤ cutoff are unaffected by truncation.
std::size_t oscillator_margin(int n_sites, int twice_s);

enum class Summation { kPlain, kCesaro };

struct TraceOptions {
  double tolerance = 1e-9;
  bool require_convergence = false;
  Summation summation = Summation::kPlain;
  std::size_t checkpoints = 4;
};

struct TraceReport {
  std::size_t cutoff = 0;
  std::vector<std::size_t> checkpoint_cutoffs;
  /// Max-norm of the partial trace at each checkpoint.
  std::vector<double> checkpoint_norms;
  /// Max-norm change between the last two checkpoints, relative to the last.
  double last_change = 0.0;
  /// ‖term(Λ)‖ / ‖term(Λ/2)‖; power-law decay n^γ gives about 2^γ.
  double tail_ratio = 0.0;
  /// Estimated decay exponent γ of the summand norms.
  double decay_exponent = 0.0;
  bool converged = false;
  bool domain_ok = false;
};

template <Scalar T>
struct TraceResult {
  Matrix<T> value;
  TraceReport report;
};

enum class WNormalization {
  /// Γ(-p-x+i-N)/Γ(-p-x+i+1); gives W₀₀ = Q.
  kShifted,
  /// Γ(-p-x+i-N)/Γ(-p-x+i), which equals (-p-x+i) times the shifted one.
  kUnshifted,
};

/// Oscillator-space traces built from one double-row monodromy U(x).
///
/// U is built once at cutoff + margin; every trace sums number states
/// 0..cutoff only.
template <Scalar T>
class OscillatorTrace {
 public:
  OscillatorTrace(const T& x, const ChainParams<T>& params, std::size_t cutoff, bool spin_flip = false);

  const T& x() const { return x_; }
  std::size_t cutoff() const { return cutoff_; }
  std::size_t internal_cutoff() const { return fock_.cutoff; }
  std::size_t space_dim() const { return space_dim_; }
  /// Parameters actually used in the construction (negated for Q₋).
  const ChainParams<T>& params() const { return params_; }
  const FockSpace<T>& fock() const { return fock_; }
  const SpinRep<T>& rep() const { return rep_; }

  const Matrix<T>& u() const { return u_; }
  /// Ũ = U + ā U a.
  const Matrix<T>& u_tilde() const;

  /// D×D block ⟨n|Y|n'⟩ of an operator on Fock⊗V.
  Matrix<T> block(const Matrix<T>& y, std::size_t n, std::size_t n_prime) const;

  /// Σ_{n=j..Λ} coeff[n] ⟨n-j|Y|n⟩, i.e. tr(c(N) ā^j Y).
  TraceResult<T> weighted_trace(const Matrix<T>& y, const std::vector<T>& coeff, std::size_t j,
                                const TraceOptions& options = {}) const;

  /// Q(x) = tr K(x) U(x).
  TraceResult<T> q(const TraceOptions& options = {}) const;

  /// W_{i,j}(x) = tr[Γ(-p-x+i-N)/Γ(·) ā^j Ũ(x)].
  TraceResult<T> w(int i, std::size_t j, WNormalization norm = WNormalization::kShifted,
                   const TraceOptions& options = {}) const;

  /// Coefficients Γ(z-n)/Γ(z+1+shift_extra) for n = 0..Λ with z = -p-x+i.
  std::vector<T> w_coefficients(int i, WNormalization norm) const;

  /// X_{i,j}(x,y) built from W_{i+1,j+1}, W_{i+2,j+2} and the blocks at y.
  Matrix<T> x_op(int i, std::size_t j, const T& y, const AuxBlockOperator<T>& at_y,
                 const TraceOptions& options = {}) const;

 private:
  T x_;
  ChainParams<T> params_;
  std::size_t cutoff_;
  std::size_t space_dim_;
  FockSpace<T> fock_;
  SpinRep<T> rep_;
  Matrix<T> u_;
  mutable std::optional<Matrix<T>> u_tilde_;
};

/// Q(x) truncated at `cutoff`.
template <Scalar T>
TraceResult<T> q_operator(const T& x, const ChainParams<T>& params, std::size_t cutoff,
                          const TraceOptions& options = {});

/// Q₋(x): p -> -p, q -> -q, S± -> S∓, S₃ -> -S₃.
template <Scalar T>
TraceResult<T> q_minus(const T& x, const ChainParams<T>& params, std::size_t cutoff,
                       const TraceOptions& options = {});

template <Scalar T>
TraceResult<T> w_op(int i, std::size_t j, const T& x, const ChainParams<T>& params, std::size_t cutoff,
                    const TraceOptions& options = {});

template <Scalar T>
Matrix<T> x_op(int i, std::size_t j, const T& x, const T& y, const ChainParams<T>& params,
               std::size_t cutoff, const TraceOptions& options = {});

/// Magnon number (sum of ladder indices) of each basis state of V.
std::vector<int> magnon_numbers(int n_sites, int twice_s);

/// Basis indices of V with the given magnon number.
std::vector<std::size_t> sector_indices(int n_sites, int twice_s, int magnons);

/// Global spin flip J^{⊗N} on V.
template <Scalar T>
Matrix<T> global_spin_flip(int n_sites, int twice_s);

}  // namespace openq
