#include "openq/bethe.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace openq {
namespace {

template <Scalar T>
T num(long v) {
  return from_ratio<T>(v);
}

constexpr std::array<std::pair<FcrFunction, std::string_view>, 12> kFcrIds{{
    {FcrFunction::kF, "f"},
    {FcrFunction::kH, "h"},
    {FcrFunction::kGA, "g_A"},
    {FcrFunction::kGD, "g_Dt"},
    {FcrFunction::kKA, "k_A"},
    {FcrFunction::kKD, "k_Dt"},
    {FcrFunction::kLDD, "l_DtDt"},
    {FcrFunction::kLAA, "l_AA"},
    {FcrFunction::kMAA, "m_AA"},
    {FcrFunction::kMAD, "m_ADt"},
    {FcrFunction::kLAD, "l_ADt"},
    {FcrFunction::kLDA, "l_DtA"},
}};

}  // namespace

std::string_view fcr_function_id(FcrFunction f) {
  for (const auto& [key, id] : kFcrIds) {
    if (key == f) return id;
  }
  return "?";
}

FcrFunction parse_fcr_function(std::string_view id) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };
  for (const auto& [key, name] : kFcrIds) {
    if (lower(name) == lower(id)) return key;
  }
  throw ConfigError("unknown exchange-relation function '" + std::string(id) + "'");
}

template <Scalar T>
T fcr_function(FcrFunction fn, const T& x, const T& y) {
  const T one(1);
  const T two = num<T>(2);
  const auto ctx = fcr_function_id(fn);
  switch (fn) {
    case FcrFunction::kF:
      return checked_divide(T((x + y) * (x - y - one)), T((x - y) * (x + y + one)), ctx);
    case FcrFunction::kH:
      return checked_divide(T((x - y + one) * (x + y + two)), T((x - y) * (x + y + one)), ctx);
    case FcrFunction::kGA:
      return checked_divide(T(two * y), T((x - y) * (one + two * y)), ctx);
    case FcrFunction::kGD:
      return checked_divide(T(-one), T(x + y + one), ctx);
    case FcrFunction::kKA:
      return checked_divide(T(num<T>(4) * y * (one + x)), T((one + two * x) * (one + two * y) * (x + y + one)), ctx);
    case FcrFunction::kKD:
      return checked_divide(T(-two * (one + x)), T((x - y) * (one + two * x)), ctx);
    case FcrFunction::kLDD:
      return checked_divide(T(-one), T(one + x + y), ctx);
    case FcrFunction::kLAA:
      return checked_divide(T(-two * x), T((x - y) * (one + two * x) * (one + two * y)), ctx);
    case FcrFunction::kMAA:
      return checked_divide(T(two * x * (x - y + one)), T((x - y) * (one + two * x) * (one + x + y)), ctx);
    case FcrFunction::kMAD:
      return checked_divide(T(x + y), T((x - y) * (x + y + one)), ctx);
    case FcrFunction::kLAD:
      return checked_divide(T(-two * x), T((x - y) * (one + two * x)), ctx);
    case FcrFunction::kLDA:
      return checked_divide(T(-one), T((one + two * y) * (x + y + one)), ctx);
  }
  throw ConfigError("unknown exchange-relation function");
}

template <Scalar T>
Vector<T> reference_state(const ChainParams<T>& params) {
  Vector<T> v(params.space_dim());
  v[0] = T(1);
  return v;
}

template <Scalar T>
T alpha(const T& x, const ChainParams<T>& params) {
  const T base = x + from_ratio<T>(1, 2) + params.spin();
  return (params.q + x) * ipow(base, static_cast<unsigned>(2 * params.n_sites));
}

template <Scalar T>
T delta_tilde(const T& x, const ChainParams<T>& params) {
  const T one(1);
  const T two = num<T>(2);
  const T base = x + from_ratio<T>(1, 2) - params.spin();
  return checked_divide(T(two * x), T(two * x + one), "delta-tilde at x = -1/2") * (params.q - x - one) *
         ipow(base, static_cast<unsigned>(2 * params.n_sites));
}

template <Scalar T>
Vector<T> offshell_state(const std::vector<T>& roots, const ChainParams<T>& params) {
  auto v = reference_state(params);
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) v = double_row_blocks(*it, params).b.apply(v);
  return v;
}

template <Scalar T>
T t_eigenvalue(const T& x, const std::vector<T>& roots, const ChainParams<T>& params) {
  const T one(1);
  const T two = num<T>(2);
  T a = checked_divide(T(two * (one + x) * (params.p + x)), T(one + two * x), "t(x)") * alpha(x, params);
  T d = (params.p - x - one) * delta_tilde(x, params);
  for (const auto& xk : roots) {
    a *= fcr_function(FcrFunction::kF, x, xk);
    d *= fcr_function(FcrFunction::kH, x, xk);
  }
  return a + d;
}

template <Scalar T>
T q_polynomial(const T& x, const std::vector<T>& roots) {
  T out(1);
  for (const auto& xk : roots) out *= (x - xk) * (x + xk + T(1));
  return out;
}

template <Scalar T>
T q_eigenvalue(const T& x, const std::vector<T>& roots, const ChainParams<T>& params) {
  const T norm = num<T>(2 * static_cast<long>(roots.size())) - params.p - params.q -
                 num<T>(params.n_sites) * num<T>(params.twice_s);
  return checked_divide(q_polynomial(x, roots), norm, "Q eigenvalue normalisation 2m-p-q-2Ns");
}

template <Scalar T>
CoefficientContext<T>::CoefficientContext(std::vector<T> roots, ChainParams<T> params)
    : roots_(std::move(roots)), params_(std::move(params)) {
  delta_.reserve(roots_.size());
  for (const auto& x : roots_) delta_.push_back(delta_tilde(x, params_));
}

template <Scalar T>
typename CoefficientContext<T>::IndexSet CoefficientContext<T>::all() const {
  IndexSet out(roots_.size());
  for (Index k = 0; k < out.size(); ++k) out[k] = k;
  return out;
}

template <Scalar T>
typename CoefficientContext<T>::IndexSet CoefficientContext<T>::rest() const {
  IndexSet out;
  for (Index k = 1; k < roots_.size(); ++k) out.push_back(k);
  return out;
}

template <Scalar T>
void CoefficientContext<T>::use_on_shell_delta() {
  const auto every = all();
  std::vector<T> shell(roots_.size());
  for (Index k = 0; k < roots_.size(); ++k) {
    const T& xk = roots_[k];
    T hprod(1);
    for (Index l : every) {
      if (l != k) hprod *= h(k, l);
    }
    shell[k] = checked_divide(T((params_.p + xk) * a(k, every)), T((params_.p - xk - T(1)) * hprod),
                              "on-shell delta-tilde");
  }
  delta_ = std::move(shell);
}

template <Scalar T>
T CoefficientContext<T>::delta(Index k) const {
  return delta_.at(k);
}

template <Scalar T>
T CoefficientContext<T>::f(Index k, Index j) const {
  return fcr_function(FcrFunction::kF, roots_[k], roots_[j]);
}

template <Scalar T>
T CoefficientContext<T>::h(Index k, Index j) const {
  return fcr_function(FcrFunction::kH, roots_[k], roots_[j]);
}

namespace {

template <class Set>
Set without(const Set& set, std::size_t a, std::size_t b = static_cast<std::size_t>(-1)) {
  Set out;
  for (auto k : set) {
    if (k != a && k != b) out.push_back(k);
  }
  return out;
}

}  // namespace

template <Scalar T>
T CoefficientContext<T>::a(Index k, const IndexSet& set) const {
  const T& xk = roots_.at(k);
  const T two = num<T>(2);
  T out = checked_divide(T(two * xk * alpha(xk, params_)), T(T(1) + two * xk), "A coefficient");
  for (Index j : set) {
    if (j != k) out *= f(k, j);
  }
  return out;
}

template <Scalar T>
T CoefficientContext<T>::dt(Index k, const IndexSet& set) const {
  T out = delta_.at(k);
  for (Index j : set) {
    if (j != k) out *= h(k, j);
  }
  return out;
}

template <Scalar T>
T CoefficientContext<T>::a2(Index k, Index l, const IndexSet& set) const {
  const T& xk = roots_[k];
  const T& xl = roots_[l];
  const T one(1);
  const T two = num<T>(2);
  const auto reduced = without(set, k);
  const T bracket = checked_divide(a(l, reduced), T(xk - xl), "A2 coefficient") -
                    checked_divide(dt(l, reduced), T(one + xk + xl), "A2 coefficient");
  return checked_divide(T(two * xk), T(one + two * xk), "A2 coefficient") * bracket;
}

template <Scalar T>
T CoefficientContext<T>::dt2(Index k, Index l, const IndexSet& set) const {
  const T& xk = roots_[k];
  const T& xl = roots_[l];
  const T one(1);
  const T two = num<T>(2);
  const auto reduced = without(set, k);
  const T bracket = checked_divide(a(l, reduced), T(one + xk + xl), "D2 coefficient") -
                    checked_divide(dt(l, reduced), T(xk - xl), "D2 coefficient");
  return checked_divide(T(two + two * xk), T(one + two * xk), "D2 coefficient") * bracket;
}

template <Scalar T>
T CoefficientContext<T>::c1(Index j, const IndexSet& set) const {
  const T& x1 = roots_[0];
  const T one(1);
  const T two = num<T>(2);
  const auto reduced = without(set, j);
  return checked_divide(T(one + two * x1), T(two + two * x1), "C1 coefficient") * a(0, reduced) * dt2(0, j, set) +
         checked_divide(T(one + two * x1), T(two * x1), "C1 coefficient") * dt(0, reduced) * a2(0, j, set);
}

template <Scalar T>
T CoefficientContext<T>::c2_t(Index j, Index k, const IndexSet& set) const {
  const T& x1 = roots_[0];
  const T one(1);
  const T two = num<T>(2);
  const T c = checked_divide(T(one + two * x1), T(two + two * x1), "C2 coefficient");
  const T inv = checked_inverse(T(two + two * x1), "C2 coefficient");
  const auto no_k = without(set, k);
  const auto no_j = without(set, j);
  return c * (a2(0, j, no_k) - inv * dt2(0, j, no_k)) * dt2(0, k, set) +
         c * (a2(0, k, no_j) - inv * dt2(0, k, no_j)) * dt2(0, j, set);
}

template <Scalar T>
T CoefficientContext<T>::c2_s(Index j, Index k, const IndexSet& set) const {
  const T& x1 = roots_[0];
  const T one(1);
  const T two = num<T>(2);
  const T c = checked_divide(T(one + two * x1), T(two * x1), "C2 coefficient");
  const T inv = checked_inverse(T(two * x1), "C2 coefficient");
  const auto no_k = without(set, k);
  const auto no_j = without(set, j);
  return c * (inv * a2(0, j, no_k) + dt2(0, j, no_k)) * a2(0, k, set) +
         c * (inv * a2(0, k, no_j) + dt2(0, k, no_j)) * a2(0, j, set);
}

template <Scalar T>
T CoefficientContext<T>::bethe_g(Index j) const {
  const auto every = all();
  const T& xj = roots_.at(j);
  return (params_.p + xj) * a(j, every) - (params_.p - xj - T(1)) * dt(j, every);
}

template <Scalar T>
void CoefficientContext<T>::check_subset(const IndexSet& set, const IndexSet& sub) const {
  for (Index k : set) {
    if (k == 0 || k >= roots_.size()) throw ConfigError("coefficient: J must be a subset of I without the first root");
  }
  for (Index k : sub) {
    if (std::find(set.begin(), set.end(), k) == set.end()) throw ConfigError("coefficient: J' must be a subset of J");
  }
}

template <Scalar T>
T CoefficientContext<T>::g_recursive(int n, int i, const IndexSet& set, const IndexSet& sub) const {
  check_subset(set, sub);
  if (static_cast<std::size_t>(n) != sub.size()) throw ConfigError("coefficient: |J'| must equal n");
  const T& x1 = roots_[0];
  const T& p = params_.p;
  const T one(1);
  const T two = num<T>(2);
  const T ii = num<T>(i);
  if (n == 0) return (-p - x1 + ii) * a(0, set) + (p - x1 - one - ii) * dt(0, set);
  auto first_order = [&](Index k) { return (-p - x1 + ii) * a2(0, k, set) + (p - x1 - one - ii) * dt2(0, k, set); };
  const T pair_factor = (-p - x1 + ii + one) * (p - x1 - two - ii);
  if (n == 1) {
    const Index k = sub[0];
    return first_order(k) * g_recursive(0, i + 1, without(set, k), {}) - pair_factor * c1(k, set);
  }
  T out{};
  for (Index k : sub) out += first_order(k) * g_recursive(n - 1, i + 1, without(set, k), without(sub, k));
  for (std::size_t u = 0; u < sub.size(); ++u) {
    for (std::size_t v = u + 1; v < sub.size(); ++v) {
      const Index k = sub[u];
      const Index l = sub[v];
      out -= pair_factor * c2_t(k, l, set) * g_recursive(n - 2, i + 2, without(set, k, l), without(sub, k, l));
    }
  }
  return out;
}

template <Scalar T>
std::pair<T, T> CoefficientContext<T>::g_closed_parts(int n, int i, const IndexSet& set, const IndexSet& sub) const {
  check_subset(set, sub);
  if (static_cast<std::size_t>(n) != sub.size()) throw ConfigError("coefficient: |J'| must equal n");
  const T& x1 = roots_[0];
  const T& p = params_.p;
  const T one(1);
  const T two = num<T>(2);
  const T ii = num<T>(i);
  const auto nn = static_cast<std::size_t>(n);

  IndexSet perm = sub;
  std::sort(perm.begin(), perm.end());
  T sum_a{};
  T sum_d{};
  do {
    T prod_a(1);
    T prod_d(1);
    IndexSet remaining = set;
    for (Index jk : perm) {
      remaining = without(remaining, jk);
      const T& xj = roots_[jk];
      const T av = a(jk, remaining);
      const T dv = dt(jk, remaining);
      prod_a *= checked_divide(av, T(x1 - xj - one), "F_A") - checked_divide(dv, T(x1 + xj), "F_A");
      prod_d *= checked_divide(av, T(x1 + xj + two), "F_D") - checked_divide(dv, T(x1 - xj + one), "F_D");
    }
    sum_a += prod_a;
    sum_d += prod_d;
  } while (std::next_permutation(perm.begin(), perm.end()));

  const T pre_a = rising(T(-p - x1 + ii), nn + 1);
  const T pre_d = rising(T(p - x1 - num<T>(n) - one - ii), nn + 1);
  return {pre_a * a(0, set) * sum_a, pre_d * dt(0, set) * sum_d};
}

template <Scalar T>
T CoefficientContext<T>::g_closed(int n, int i, const IndexSet& set, const IndexSet& sub) const {
  const auto [pa, pd] = g_closed_parts(n, i, set, sub);
  return pa + pd;
}

template <Scalar T>
std::pair<T, T> CoefficientContext<T>::g_altform_parts(const IndexSet& sub) const {
  check_subset(rest(), sub);
  const auto every = all();
  const T& x1 = roots_[0];
  const T& p = params_.p;
  const T one(1);
  const T two = num<T>(2);
  const auto n = sub.size();

  T pre = rising(T(-p - x1), n + 1) * rising(T(p - x1 - num<T>(static_cast<long>(n)) - one), n) * a(0, every);
  IndexSet with_first{0};
  with_first.insert(with_first.end(), sub.begin(), sub.end());
  for (std::size_t u = 0; u < with_first.size(); ++u) {
    for (std::size_t v = u + 1; v < with_first.size(); ++v) {
      const Index l = with_first[u];
      const Index k = with_first[v];
      pre *= checked_inverse(T(f(k, l) * h(k, l)), "alternative form");
    }
  }
  std::vector<T> sub_roots;
  for (Index k : sub) {
    const T& xk = roots_[k];
    pre *= checked_divide(T((one + two * xk) * a(k, every)), T((xk - x1) * (xk + x1 + one) * (p - xk - one)),
                          "alternative form");
    sub_roots.push_back(xk);
  }
  const T sign = n % 2 == 0 ? T(1) : T(-1);
  const T xa = x_n_sum(sub_roots, x1, p);
  const T xd = x_n_sum(sub_roots, T(-x1 - one), p);
  return {sign * xa * pre, -sign * xd * pre};
}

template <Scalar T>
T CoefficientContext<T>::g_altform(const IndexSet& sub) const {
  const auto [pa, pd] = g_altform_parts(sub);
  return pa + pd;
}

template <Scalar T>
T x_n_sum(const std::vector<T>& sub, const T& x1, const T& p) {
  const T one(1);
  const T two = num<T>(2);
  const auto n = sub.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < n; ++k) perm[k] = k;
  T total{};
  do {
    T prod(1);
    for (std::size_t k = 0; k < n; ++k) {
      const T& xj = sub[perm[k]];
      T hprod(1);
      T fprod(1);
      for (std::size_t l = 0; l < k; ++l) {
        hprod *= fcr_function(FcrFunction::kH, xj, sub[perm[l]]);
        fprod *= fcr_function(FcrFunction::kF, xj, sub[perm[l]]);
      }
      const T term = (p - xj - one) * (xj + x1 + two) * hprod + (p + xj) * (xj - x1 - one) * fprod;
      prod *= checked_divide(term, T(one + two * xj), "X_n sum");
    }
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return checked_divide(total, rising(T(p - x1 - one - num<T>(static_cast<long>(n))), n), "X_n sum");
}

#define OPENQ_INSTANTIATE(T)                                                              \
  template T fcr_function<T>(FcrFunction, const T&, const T&);                            \
  template Vector<T> reference_state<T>(const ChainParams<T>&);                           \
  template T alpha<T>(const T&, const ChainParams<T>&);                                   \
  template T delta_tilde<T>(const T&, const ChainParams<T>&);                             \
  template Vector<T> offshell_state<T>(const std::vector<T>&, const ChainParams<T>&);     \
  template T t_eigenvalue<T>(const T&, const std::vector<T>&, const ChainParams<T>&);     \
  template T q_polynomial<T>(const T&, const std::vector<T>&);                            \
  template T q_eigenvalue<T>(const T&, const std::vector<T>&, const ChainParams<T>&);     \
  template class CoefficientContext<T>;                                                   \
  template T x_n_sum<T>(const std::vector<T>&, const T&, const T&);

OPENQ_INSTANTIATE(Rational)
OPENQ_INSTANTIATE(Complex)

#undef OPENQ_INSTANTIATE

}  // namespace openq
