#include "openq/lattice.hpp"

#include <cmath>
#include <string>

namespace openq {
namespace {

template <Scalar T>
T half() {
  return from_ratio<T>(1, 2);
}

template <Scalar T>
T num(long v) {
  return from_ratio<T>(v);
}

template <Scalar T>
Matrix<T> power(const Matrix<T>& m, int k) {
  Matrix<T> r = Matrix<T>::identity(m.rows());
  for (int i = 0; i < k; ++i) r = r * m;
  return r;
}

// Σ_k (X^k ⊗ Y^k)/k!, finite because Y is nilpotent of order ≤ kmax+1.
template <Scalar T>
Matrix<T> nilpotent_exp(const Matrix<T>& x, const Matrix<T>& y, int kmax) {
  Matrix<T> xk = Matrix<T>::identity(x.rows());
  Matrix<T> yk = Matrix<T>::identity(y.rows());
  Matrix<T> out = kron(xk, yk);
  T factorial(1);
  for (int k = 1; k <= kmax; ++k) {
    xk = xk * x;
    yk = yk * y;
    factorial *= num<T>(k);
    out.add_scaled(T(1) / factorial, kron(xk, yk));
  }
  return out;
}

template <Scalar T>
std::vector<std::size_t> chain_dims(std::size_t aux, const ChainParams<T>& params) {
  std::vector<std::size_t> dims{aux};
  for (int k = 0; k < params.n_sites; ++k) dims.push_back(params.site_dim());
  return dims;
}

// 𝓜 K 𝓜̂ with 𝓜 = site_1 … site_N and 𝓜̂ = site_N … site_1.
template <Scalar T>
Matrix<T> sandwich(const std::vector<Matrix<T>>& sites, const Matrix<T>& k) {
  Matrix<T> out = k;
  for (auto it = sites.rbegin(); it != sites.rend(); ++it) out = *it * out;
  for (auto it = sites.rbegin(); it != sites.rend(); ++it) out = out * *it;
  return out;
}

}  // namespace

template <Scalar T>
void ChainParams<T>::validate() const {
  if (n_sites < 1) throw ConfigError("chain: number of sites must be at least 1");
  if (twice_s < 1) throw ConfigError("chain: 2s must be at least 1");
}

template <Scalar T>
std::size_t ChainParams<T>::space_dim() const {
  std::size_t d = 1;
  for (int k = 0; k < n_sites; ++k) d *= site_dim();
  return d;
}

std::size_t oscillator_margin(int n_sites, int twice_s) {
  return static_cast<std::size_t>(twice_s) * (2 * static_cast<std::size_t>(n_sites) + 1) + 4;
}

template <Scalar T>
Matrix<T> r_matrix(const T& x) {
  Matrix<T> r(4, 4);
  r(0, 0) = x + T(1);
  r(1, 1) = x;
  r(1, 2) = T(1);
  r(2, 1) = T(1);
  r(2, 2) = x;
  r(3, 3) = x + T(1);
  return r;
}

template <Scalar T>
Matrix<T> lax_fundamental(const T& x, const SpinRep<T>& rep) {
  const auto d = rep.dim();
  const auto id = Matrix<T>::identity(d);
  Matrix<T> l(2 * d, 2 * d);
  const T shift = x + half<T>();
  l.set_block(0, 0, id * shift + rep.s3);
  l.set_block(0, d, rep.sm);
  l.set_block(d, 0, rep.sp);
  l.set_block(d, d, id * shift - rep.s3);
  return l;
}

template <Scalar T>
Matrix<T> lax_osc(const T& x, const FockSpace<T>& fock) {
  const auto d = fock.dim();
  const auto id = Matrix<T>::identity(d);
  Matrix<T> l(2 * d, 2 * d);
  l.set_block(0, 0, id);
  l.set_block(0, d, fock.adag);
  l.set_block(d, 0, fock.a);
  l.set_block(d, d, id * (x + T(1)) + fock.num);
  return l;
}

template <Scalar T>
Matrix<T> lax_osc_bar(const T& x, const FockSpace<T>& fock) {
  const auto d = fock.dim();
  const auto id = Matrix<T>::identity(d);
  Matrix<T> l(2 * d, 2 * d);
  l.set_block(0, 0, id * x - fock.num);
  l.set_block(0, d, fock.adag);
  l.set_block(d, 0, fock.a);
  l.set_block(d, d, -id);
  return l;
}

template <Scalar T>
Matrix<T> lax_q(const T& x, const FockSpace<T>& fock, const SpinRep<T>& rep) {
  const auto d = rep.dim();
  std::vector<T> g(d);
  for (std::size_t k = 0; k < d; ++k) {
    // s - μ is a non-negative integer for every S₃ eigenvalue μ.
    const double mu = ScalarTraits<T>::to_complex(rep.s3(k, k)).real();
    const long count = std::lround(rep.twice_s / 2.0 - mu);
    const T start = x + half<T>() - from_ratio<T>(rep.twice_s, 2);
    g[k] = rising(start, static_cast<std::size_t>(count));
  }
  const auto left = nilpotent_exp(fock.a, rep.sm, rep.twice_s);
  const auto right = nilpotent_exp(fock.adag, rep.sp, rep.twice_s);
  const auto middle = kron(Matrix<T>::identity(fock.dim()), Matrix<T>::diagonal(g));
  return left * middle * right;
}

template <Scalar T>
Matrix<T> k_left(const T& x, const T& p) {
  return Matrix<T>::diagonal({p + x + T(1), p - x - T(1)});
}

template <Scalar T>
Matrix<T> k_right(const T& x, const T& q) {
  return Matrix<T>::diagonal({q + x, q - x});
}

template <Scalar T>
Matrix<T> k_osc_left(const T& x, const T& p, const FockSpace<T>& fock) {
  std::vector<T> diag(fock.dim());
  const T base = -p - x;
  for (std::size_t n = 0; n < fock.dim(); ++n) diag[n] = gamma_ratio(base, n + 1, GammaDirection::kDown);
  return Matrix<T>::diagonal(diag);
}

template <Scalar T>
Matrix<T> k_osc_right(const T& x, const T& q, const FockSpace<T>& fock) {
  std::vector<T> diag(fock.dim());
  T value(1);
  for (std::size_t n = 0; n < fock.dim(); ++n) {
    diag[n] = value;
    value *= q - x - num<T>(static_cast<long>(n) + 1);
  }
  return Matrix<T>::diagonal(diag);
}

template <Scalar T>
Matrix<T> AuxBlockOperator<T>::d_tilde(const T& x) const {
  Matrix<T> out = d;
  out.add_scaled(-checked_inverse(T(T(1) + num<T>(2) * x), "D-tilde at x = -1/2"), a);
  return out;
}

template <Scalar T>
Matrix<T> AuxBlockOperator<T>::assemble() const {
  const auto n = a.rows();
  Matrix<T> out(2 * n, 2 * n);
  out.set_block(0, 0, a);
  out.set_block(0, n, b);
  out.set_block(n, 0, c);
  out.set_block(n, n, d);
  return out;
}

template <Scalar T>
Matrix<T> double_row(const T& x, const ChainParams<T>& params) {
  params.validate();
  const auto rep = build_spin_rep<T>(params.twice_s);
  const auto dims = chain_dims(2, params);
  const auto lax = lax_fundamental(x, rep);
  std::vector<Matrix<T>> sites;
  for (int k = 0; k < params.n_sites; ++k) sites.push_back(lift(lax, {0, static_cast<std::size_t>(k) + 1}, dims));
  return sandwich(sites, lift(k_right(x, params.q), {0}, dims));
}

template <Scalar T>
AuxBlockOperator<T> double_row_blocks(const T& x, const ChainParams<T>& params) {
  const auto u = double_row(x, params);
  const auto n = params.space_dim();
  return {u.block(0, 0, n, n), u.block(0, n, n, n), u.block(n, 0, n, n), u.block(n, n, n, n)};
}

template <Scalar T>
Matrix<T> double_row_q(const T& x, const ChainParams<T>& params, const FockSpace<T>& fock,
                       const SpinRep<T>& rep) {
  params.validate();
  if (rep.twice_s != params.twice_s) throw DimensionError("double_row_q: representation does not match chain");
  const auto dims = chain_dims(fock.dim(), params);
  const auto lax = lax_q(x, fock, rep);
  std::vector<Matrix<T>> sites;
  for (int k = 0; k < params.n_sites; ++k) sites.push_back(lift(lax, {0, static_cast<std::size_t>(k) + 1}, dims));
  return sandwich(sites, lift(k_osc_right(x, params.q, fock), {0}, dims));
}

template <Scalar T>
Matrix<T> transfer(const T& x, const ChainParams<T>& params) {
  const auto u = double_row_blocks(x, params);
  Matrix<T> t = u.a * (params.p + x + T(1));
  t.add_scaled(params.p - x - T(1), u.d);
  return t;
}

template <Scalar T>
Matrix<T> transfer_split(const T& x, const ChainParams<T>& params) {
  const auto u = double_row_blocks(x, params);
  const T one(1);
  const T ca = checked_divide(T(num<T>(2) * (one + x) * (params.p + x)), T(one + num<T>(2) * x), "split transfer");
  Matrix<T> t = u.a * ca;
  t.add_scaled(params.p - x - one, u.d_tilde(x));
  return t;
}

template <Scalar T>
OscillatorTrace<T>::OscillatorTrace(const T& x, const ChainParams<T>& params, std::size_t cutoff, bool spin_flip)
    : x_(x),
      params_(spin_flip ? params.negated() : params),
      cutoff_(cutoff),
      space_dim_(params.space_dim()),
      fock_(build_fock<T>(cutoff + oscillator_margin(params.n_sites, params.twice_s))),
      rep_(spin_flip ? build_spin_rep<T>(params.twice_s).flipped() : build_spin_rep<T>(params.twice_s)) {
  if (cutoff == 0) throw ConfigError("trace: cutoff must be at least 1");
  u_ = double_row_q(x_, params_, fock_, rep_);
}

template <Scalar T>
const Matrix<T>& OscillatorTrace<T>::u_tilde() const {
  if (!u_tilde_) {
    Matrix<T> ut = u_;
    const auto d = space_dim_;
    const auto top = fock_.dim();
    for (std::size_t n = 1; n < top; ++n) {
      for (std::size_t np = 1; np < top; ++np) {
        const T factor = num<T>(static_cast<long>(np));
        for (std::size_t r = 0; r < d; ++r) {
          for (std::size_t c = 0; c < d; ++c) {
            const T& v = u_((n - 1) * d + r, (np - 1) * d + c);
            if (!ScalarTraits<T>::is_zero(v)) add_product(ut(n * d + r, np * d + c), factor, v);
          }
        }
      }
    }
    u_tilde_ = std::move(ut);
  }
  return *u_tilde_;
}

template <Scalar T>
Matrix<T> OscillatorTrace<T>::block(const Matrix<T>& y, std::size_t n, std::size_t n_prime) const {
  return y.block(n * space_dim_, n_prime * space_dim_, space_dim_, space_dim_);
}

template <Scalar T>
TraceResult<T> OscillatorTrace<T>::weighted_trace(const Matrix<T>& y, const std::vector<T>& coeff, std::size_t j,
                                                  const TraceOptions& options) const {
  if (coeff.size() < cutoff_ + 1) throw DimensionError("trace: coefficient list shorter than cutoff");
  if (y.rows() < (cutoff_ + 1) * space_dim_) throw DimensionError("trace: operator smaller than cutoff");
  const auto d = space_dim_;
  Matrix<T> partial(d, d);
  Matrix<T> cesaro(d, d);
  std::size_t n_partials = 0;
  std::vector<double> term_norms(cutoff_ + 1, 0.0);

  std::vector<std::size_t> marks;
  const std::size_t count = std::max<std::size_t>(1, options.checkpoints);
  for (std::size_t k = 1; k <= count; ++k) {
    const std::size_t c = std::max<std::size_t>(1, cutoff_ * k / count);
    if (marks.empty() || c > marks.back()) marks.push_back(c);
  }

  TraceReport report;
  report.cutoff = cutoff_;
  std::size_t next_mark = 0;
  for (std::size_t n = 0; n <= cutoff_; ++n) {
    if (n >= j) {
      auto term = block(y, n - j, n);
      term *= coeff[n];
      term_norms[n] = max_abs(term);
      partial += term;
    }
    if (options.summation == Summation::kCesaro) {
      cesaro += partial;
      ++n_partials;
    }
    if (next_mark < marks.size() && n == marks[next_mark]) {
      report.checkpoint_cutoffs.push_back(n);
      if (options.summation == Summation::kCesaro) {
        report.checkpoint_norms.push_back(max_abs(cesaro) / static_cast<double>(n_partials));
      } else {
        report.checkpoint_norms.push_back(max_abs(partial));
      }
      ++next_mark;
    }
  }

  TraceResult<T> result;
  if (options.summation == Summation::kCesaro) {
    result.value = cesaro * (T(1) / num<T>(static_cast<long>(n_partials)));
  } else {
    result.value = partial;
  }

  // Convergence of the last two checkpoints, measured on the matrices
  // themselves rather than their norms.
  if (report.checkpoint_cutoffs.size() >= 2) {
    const auto prev = report.checkpoint_cutoffs[report.checkpoint_cutoffs.size() - 2];
    Matrix<T> tail(d, d);
    for (std::size_t n = std::max(prev + 1, j); n <= cutoff_; ++n) {
      auto term = block(y, n - j, n);
      term *= coeff[n];
      tail += term;
    }
    const double scale = std::max(max_abs(result.value), 1e-300);
    report.last_change = max_abs(tail) / scale;
  }
  const double last = term_norms[cutoff_];
  const double mid = term_norms[cutoff_ / 2];
  if (last == 0.0) {
    report.tail_ratio = 0.0;
    report.decay_exponent = -INFINITY;
  } else if (mid == 0.0) {
    report.tail_ratio = INFINITY;
    report.decay_exponent = INFINITY;
  } else {
    report.tail_ratio = last / mid;
    report.decay_exponent = std::log2(report.tail_ratio);
  }
  report.domain_ok = report.decay_exponent < -1.0 || options.summation == Summation::kCesaro;
  report.converged = report.last_change < options.tolerance;
  if (options.require_convergence && !(report.converged && report.domain_ok)) {
    throw ConvergenceError("trace did not converge at cutoff " + std::to_string(cutoff_) +
                           " (relative change " + std::to_string(report.last_change) + ")");
  }
  result.report = std::move(report);
  return result;
}

template <Scalar T>
TraceResult<T> OscillatorTrace<T>::q(const TraceOptions& options) const {
  std::vector<T> coeff(cutoff_ + 1);
  const T base = -params_.p - x_;
  T value = checked_inverse(T(base - T(1)), "K(x) at n = 0");
  for (std::size_t n = 0; n <= cutoff_; ++n) {
    if (n > 0) value *= checked_inverse(T(base - num<T>(static_cast<long>(n) + 1)), "K(x)");
    coeff[n] = value;
  }
  return weighted_trace(u_, coeff, 0, options);
}

template <Scalar T>
std::vector<T> OscillatorTrace<T>::w_coefficients(int i, WNormalization norm) const {
  const T z = -params_.p - x_ + num<T>(i);
  std::vector<T> coeff(cutoff_ + 1);
  T value = norm == WNormalization::kShifted ? checked_inverse(z, "W normalisation") : T(1);
  for (std::size_t n = 0; n <= cutoff_; ++n) {
    if (n > 0) value *= checked_inverse(T(z - num<T>(static_cast<long>(n))), "W coefficient");
    coeff[n] = value;
  }
  return coeff;
}

template <Scalar T>
TraceResult<T> OscillatorTrace<T>::w(int i, std::size_t j, WNormalization norm, const TraceOptions& options) const {
  return weighted_trace(u_tilde(), w_coefficients(i, norm), j, options);
}

template <Scalar T>
Matrix<T> OscillatorTrace<T>::x_op(int i, std::size_t j, const T& y, const AuxBlockOperator<T>& at_y,
                                   const TraceOptions& options) const {
  const T one(1);
  const T two = num<T>(2);
  const T& p = params_.p;
  const T ii = num<T>(i);
  Matrix<T> inner = at_y.a * ((p + y - ii) * checked_divide(T(two * y), T(one + two * y), "X operator"));
  inner.add_scaled(-(p - y - one - ii), at_y.d_tilde(y));
  const auto w1 = w(i + 1, j + 1, WNormalization::kShifted, options).value;
  const auto w2 = w(i + 2, j + 2, WNormalization::kShifted, options).value;
  Matrix<T> out = -(w1 * inner);
  out.add_scaled((p + y - ii - one) * (p - y - two - ii), w2 * at_y.c);
  return out;
}

template <Scalar T>
TraceResult<T> q_operator(const T& x, const ChainParams<T>& params, std::size_t cutoff, const TraceOptions& options) {
  return OscillatorTrace<T>(x, params, cutoff).q(options);
}

template <Scalar T>
TraceResult<T> q_minus(const T& x, const ChainParams<T>& params, std::size_t cutoff, const TraceOptions& options) {
  return OscillatorTrace<T>(x, params, cutoff, true).q(options);
}

template <Scalar T>
TraceResult<T> w_op(int i, std::size_t j, const T& x, const ChainParams<T>& params, std::size_t cutoff,
                    const TraceOptions& options) {
  return OscillatorTrace<T>(x, params, cutoff).w(i, j, WNormalization::kShifted, options);
}

template <Scalar T>
Matrix<T> x_op(int i, std::size_t j, const T& x, const T& y, const ChainParams<T>& params, std::size_t cutoff,
               const TraceOptions& options) {
  return OscillatorTrace<T>(x, params, cutoff).x_op(i, j, y, double_row_blocks(y, params), options);
}

std::vector<int> magnon_numbers(int n_sites, int twice_s) {
  const int d = twice_s + 1;
  std::size_t total = 1;
  for (int k = 0; k < n_sites; ++k) total *= static_cast<std::size_t>(d);
  std::vector<int> out(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    int m = 0;
    for (std::size_t rest = idx; rest > 0; rest /= static_cast<std::size_t>(d)) m += static_cast<int>(rest % d);
    out[idx] = m;
  }
  return out;
}

std::vector<std::size_t> sector_indices(int n_sites, int twice_s, int magnons) {
  const auto m = magnon_numbers(n_sites, twice_s);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] == magnons) out.push_back(k);
  }
  return out;
}

template <Scalar T>
Matrix<T> global_spin_flip(int n_sites, int twice_s) {
  const auto j = spin_flip_map<T>(twice_s);
  Matrix<T> out = Matrix<T>::identity(1);
  for (int k = 0; k < n_sites; ++k) out = kron(out, j);
  return out;
}

#define OPENQ_INSTANTIATE(T)                                                                                    \
  template struct ChainParams<T>;                                                                               \
  template struct AuxBlockOperator<T>;                                                                          \
  template class OscillatorTrace<T>;                                                                            \
  template Matrix<T> r_matrix<T>(const T&);                                                                     \
  template Matrix<T> lax_fundamental<T>(const T&, const SpinRep<T>&);                                           \
  template Matrix<T> lax_osc<T>(const T&, const FockSpace<T>&);                                                 \
  template Matrix<T> lax_osc_bar<T>(const T&, const FockSpace<T>&);                                             \
  template Matrix<T> lax_q<T>(const T&, const FockSpace<T>&, const SpinRep<T>&);                                \
  template Matrix<T> k_left<T>(const T&, const T&);                                                             \
  template Matrix<T> k_right<T>(const T&, const T&);                                                            \
  template Matrix<T> k_osc_left<T>(const T&, const T&, const FockSpace<T>&);                                    \
  template Matrix<T> k_osc_right<T>(const T&, const T&, const FockSpace<T>&);                                   \
  template Matrix<T> double_row<T>(const T&, const ChainParams<T>&);                                            \
  template AuxBlockOperator<T> double_row_blocks<T>(const T&, const ChainParams<T>&);                           \
  template Matrix<T> double_row_q<T>(const T&, const ChainParams<T>&, const FockSpace<T>&, const SpinRep<T>&);  \
  template Matrix<T> transfer<T>(const T&, const ChainParams<T>&);                                              \
  template Matrix<T> transfer_split<T>(const T&, const ChainParams<T>&);                                        \
  template TraceResult<T> q_operator<T>(const T&, const ChainParams<T>&, std::size_t, const TraceOptions&);     \
  template TraceResult<T> q_minus<T>(const T&, const ChainParams<T>&, std::size_t, const TraceOptions&);        \
  template TraceResult<T> w_op<T>(int, std::size_t, const T&, const ChainParams<T>&, std::size_t,               \
                                  const TraceOptions&);                                                         \
  template Matrix<T> x_op<T>(int, std::size_t, const T&, const T&, const ChainParams<T>&, std::size_t,          \
                             const TraceOptions&);                                                              \
  template Matrix<T> global_spin_flip<T>(int, int);

OPENQ_INSTANTIATE(Rational)
OPENQ_INSTANTIATE(Complex)

#undef OPENQ_INSTANTIATE

}  // namespace openq
