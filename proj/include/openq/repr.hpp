#pragma once

#include <cstddef>

#include "openq/matrix.hpp"

namespace openq {

/// Spin-s generators in the ladder basis v_k = S₋^k |hws>, k = 0..2s.
///
/// S₋ has unit entries below the diagonal and S₊ v_k = k(2s-k+1) v_{k-1}, so
/// every entry is an integer. At s = 1/2 this is exactly the Pauli choice.
template <Scalar T>
struct SpinRep {
  int twice_s = 0;
  Matrix<T> s3;
  Matrix<T> sp;
  Matrix<T> sm;

  std::size_t dim() const { return static_cast<std::size_t>(twice_s) + 1; }

  /// The representation with S± -> S∓ and S₃ -> -S₃. Its highest-weight
  /// vector is the last basis vector.
  SpinRep flipped() const { return SpinRep{twice_s, -s3, sm, sp}; }
};

template <Scalar T>
SpinRep<T> build_spin_rep(int twice_s) {
  if (twice_s < 0) throw ConfigError("spin: twice_s must be non-negative");
  const std::size_t d = static_cast<std::size_t>(twice_s) + 1;
  SpinRep<T> rep{twice_s, Matrix<T>(d, d), Matrix<T>(d, d), Matrix<T>(d, d)};
  for (std::size_t k = 0; k < d; ++k) {
    rep.s3(k, k) = from_ratio<T>(twice_s - 2 * static_cast<long>(k), 2);
    if (k + 1 < d) rep.sm(k + 1, k) = T(1);
    if (k > 0) rep.sp(k - 1, k) = from_ratio<T>(static_cast<long>(k) * (twice_s - static_cast<long>(k) + 1));
  }
  return rep;
}

/// ½(S₊S₋ + S₋S₊) + S₃².
template <Scalar T>
Matrix<T> casimir(const SpinRep<T>& rep) {
  Matrix<T> c = rep.sp * rep.sm + rep.sm * rep.sp;
  c *= from_ratio<T>(1, 2);
  return c + rep.s3 * rep.s3;
}

/// Intertwiner J with J S₃ J⁻¹ = -S₃ and J S± J⁻¹ = S∓ in the ladder basis.
template <Scalar T>
Matrix<T> spin_flip_map(int twice_s) {
  const std::size_t d = static_cast<std::size_t>(twice_s) + 1;
  Matrix<T> j(d, d);
  T c(1);
  for (std::size_t k = 0; k < d; ++k) {
    j(d - 1 - k, k) = c;
    c *= from_ratio<T>((twice_s - static_cast<long>(k)) * (static_cast<long>(k) + 1));
  }
  return j;
}

/// Truncated oscillator in the unnormalised number basis |n) = ā^n|0>:
/// a|n) = n|n-1), ā|n) = |n+1), N|n) = n|n). Traces and spectra agree with
/// the orthonormal basis and every entry stays rational.
template <Scalar T>
struct FockSpace {
  std::size_t cutoff = 0;
  Matrix<T> a;
  Matrix<T> adag;
  Matrix<T> num;

  std::size_t dim() const { return cutoff + 1; }
};

template <Scalar T>
FockSpace<T> build_fock(std::size_t cutoff) {
  if (cutoff == 0) throw ConfigError("fock: cutoff must be at least 1");
  const std::size_t d = cutoff + 1;
  FockSpace<T> f{cutoff, Matrix<T>(d, d), Matrix<T>(d, d), Matrix<T>(d, d)};
  for (std::size_t n = 0; n < d; ++n) {
    f.num(n, n) = from_ratio<T>(static_cast<long>(n));
    if (n > 0) f.a(n - 1, n) = from_ratio<T>(static_cast<long>(n));
    if (n + 1 < d) f.adag(n + 1, n) = T(1);
  }
  return f;
}

enum class GammaDirection { kDown, kUp };

/// kDown: Γ(base-n)/Γ(base) = ∏_{k=1..n} 1/(base-k).
/// kUp:   Γ(base+n)/Γ(base) = ∏_{k=0..n-1} (base+k).
template <Scalar T>
T gamma_ratio(const T& base, std::size_t n, GammaDirection direction) {
  T result(1);
  for (std::size_t k = 0; k < n; ++k) {
    if (direction == GammaDirection::kDown) {
      result *= checked_inverse(T(base - from_ratio<T>(static_cast<long>(k) + 1)), "gamma ratio");
    } else {
      result *= base + from_ratio<T>(static_cast<long>(k));
    }
  }
  return result;
}

/// Rising factorial (z)_n = z(z+1)...(z+n-1).
template <Scalar T>
T rising(const T& z, std::size_t n) {
  return gamma_ratio(z, n, GammaDirection::kUp);
}

}  // namespace openq
