#include "openq/verify.hpp"

#include <array>
#include <atomic>
#include <cctype>
#include <thread>

#include "openq/bethe.hpp"

namespace openq {
namespace {

constexpr std::array<std::pair<Relation, std::string_view>, 15> kRelationIds{{
    {Relation::kBybeA, "bybe-a"},
    {Relation::kBybeB, "bybe-b"},
    {Relation::kBybe1, "bybe-1"},
    {Relation::kBybe2, "bybe-2"},
    {Relation::kRll, "rll"},
    {Relation::kUnitarity, "unitarity"},
    {Relation::kFcrAB, "fcr-ab"},
    {Relation::kFcrDB, "fcr-db"},
    {Relation::kFcrCB, "fcr-cb"},
    {Relation::kQfcrI, "qfcr-i"},
    {Relation::kQfcrII, "qfcr-ii"},
    {Relation::kUbExchange, "ub-exchange"},
    {Relation::kMtildeInverse, "mtilde-inverse"},
    {Relation::kTraceConj, "trace-conj"},
    {Relation::kWbExchange, "wb-exchange"},
}};

template <Scalar T>
T num(long v) {
  return from_ratio<T>(v);
}

// LHS and RHS of one relation. When `fock_factor` is set, only entries whose
// oscillator index (that tensor factor of `dims`) is ≤ cutoff are compared.
template <Scalar T>
struct Sides {
  Matrix<T> lhs;
  Matrix<T> rhs;
  std::vector<std::size_t> dims;
  std::optional<std::size_t> fock_factor;
  std::size_t cutoff = 0;
};

template <Scalar T>
struct Measured {
  double residual = 0.0;
  double scale = 0.0;
  bool zero = true;
};

template <Scalar T>
Measured<T> measure(const Sides<T>& s) {
  if (s.lhs.rows() != s.rhs.rows() || s.lhs.cols() != s.rhs.cols()) {
    throw DimensionError("relation sides have different shapes");
  }
  std::vector<bool> keep(s.lhs.rows(), true);
  if (s.fock_factor) {
    std::size_t stride = 1;
    for (std::size_t k = *s.fock_factor + 1; k < s.dims.size(); ++k) stride *= s.dims[k];
    const std::size_t fdim = s.dims[*s.fock_factor];
    for (std::size_t r = 0; r < keep.size(); ++r) keep[r] = (r / stride) % fdim <= s.cutoff;
  }
  Measured<T> out;
  for (std::size_t r = 0; r < s.lhs.rows(); ++r) {
    if (!keep[r]) continue;
    for (std::size_t c = 0; c < s.lhs.cols(); ++c) {
      if (!keep[c]) continue;
      const T diff = s.lhs(r, c) - s.rhs(r, c);
      if (!ScalarTraits<T>::is_zero(diff)) out.zero = false;
      out.residual = std::max(out.residual, magnitude(diff));
      out.scale = std::max(out.scale, magnitude(s.lhs(r, c)));
    }
  }
  return out;
}

template <Scalar T>
Matrix<T> id(std::size_t n) {
  return Matrix<T>::identity(n);
}

// Fock ⊗ V factor sizes: oscillator first, then the sites.
std::vector<std::size_t> with_sites(std::vector<std::size_t> head, int n_sites, int twice_s) {
  for (int k = 0; k < n_sites; ++k) head.push_back(static_cast<std::size_t>(twice_s) + 1);
  return head;
}

std::vector<std::size_t> range(std::size_t from, std::size_t count) {
  std::vector<std::size_t> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = from + k;
  return out;
}

template <Scalar T>
Sides<T> bybe_a(const RelationPoint<T>& pt) {
  const auto params = pt.params();
  const auto dims = with_sites({2, 2}, pt.n_sites, pt.twice_s);
  auto sites = range(2, static_cast<std::size_t>(pt.n_sites));
  auto on = [&](std::size_t aux) {
    std::vector<std::size_t> pos{aux};
    pos.insert(pos.end(), sites.begin(), sites.end());
    return pos;
  };
  const auto ux = lift(double_row(pt.x, params), on(0), dims);
  const auto uy = lift(double_row(pt.y, params), on(1), dims);
  const auto rm = lift(r_matrix(T(pt.x - pt.y)), {0, 1}, dims);
  const auto rp = lift(r_matrix(T(pt.x + pt.y)), {0, 1}, dims);
  return {rm * ux * rp * uy, uy * rp * ux * rm, dims, std::nullopt, 0};
}

template <Scalar T>
Sides<T> bybe_b(const RelationPoint<T>& pt) {
  const T two = num<T>(2);
  const auto kx = kron(k_left(pt.x, pt.p), id<T>(2));
  const auto ky = kron(id<T>(2), k_left(pt.y, pt.p));
  const auto r1 = r_matrix(T(pt.y - pt.x));
  const auto r2 = r_matrix(T(-pt.x - pt.y - two));
  return {r1 * kx * r2 * ky, ky * r2 * kx * r1, {2, 2}, std::nullopt, 0};
}

template <Scalar T>
Sides<T> bybe_1(const RelationPoint<T>& pt) {
  const auto params = pt.params();
  const auto fock = build_fock<T>(pt.cutoff + oscillator_margin(pt.n_sites, pt.twice_s));
  const auto rep = build_spin_rep<T>(pt.twice_s);
  const auto dims = with_sites({2, fock.dim()}, pt.n_sites, pt.twice_s);
  const auto sites = range(2, static_cast<std::size_t>(pt.n_sites));
  std::vector<std::size_t> osc_pos{1};
  osc_pos.insert(osc_pos.end(), sites.begin(), sites.end());
  std::vector<std::size_t> aux_pos{0};
  aux_pos.insert(aux_pos.end(), sites.begin(), sites.end());
  const auto ux = lift(double_row_q(pt.x, params, fock, rep), osc_pos, dims);
  const auto uy = lift(double_row(pt.y, params), aux_pos, dims);
  const auto lm = lift(lax_osc(T(pt.x - pt.y), fock), {0, 1}, dims);
  const auto lp = lift(lax_osc(T(pt.x + pt.y), fock), {0, 1}, dims);
  return {lm * ux * lp * uy, uy * lp * ux * lm, dims, std::size_t{1}, pt.cutoff};
}

template <Scalar T>
Sides<T> bybe_2(const RelationPoint<T>& pt) {
  const T two = num<T>(2);
  const auto fock = build_fock<T>(pt.cutoff + 4);
  const std::vector<std::size_t> dims{2, fock.dim()};
  const auto kx = lift(k_osc_left(pt.x, pt.p, fock), {1}, dims);
  const auto ky = lift(k_left(pt.y, pt.p), {0}, dims);
  const auto l1 = lax_osc_bar(T(pt.y - pt.x), fock);
  const auto l2 = lax_osc_bar(T(-pt.x - pt.y - two), fock);
  return {l1 * kx * l2 * ky, ky * l2 * kx * l1, dims, std::size_t{1}, pt.cutoff};
}

template <Scalar T>
Sides<T> rll(const RelationPoint<T>& pt) {
  const auto fock = build_fock<T>(pt.cutoff + static_cast<std::size_t>(pt.twice_s) + 4);
  const auto rep = build_spin_rep<T>(pt.twice_s);
  const std::vector<std::size_t> dims{2, fock.dim(), rep.dim()};
  const auto lf = lift(lax_fundamental(pt.y, rep), {0, 2}, dims);
  const auto rq = lift(lax_q(pt.x, fock, rep), {1, 2}, dims);
  const auto lo = lift(lax_osc(T(pt.x - pt.y), fock), {0, 1}, dims);
  return {lf * rq * lo, lo * rq * lf, dims, std::size_t{1}, pt.cutoff};
}

template <Scalar T>
Sides<T> unitarity(const RelationPoint<T>& pt) {
  const auto rep = build_spin_rep<T>(pt.twice_s);
  const auto lhs = lax_fundamental(pt.x, rep) * lax_fundamental(T(-pt.x), rep);
  Matrix<T> rhs = id<T>(2 * rep.dim()) * T(from_ratio<T>(1, 4) - pt.x * pt.x);
  rhs += kron(id<T>(2), casimir(rep));
  return {lhs, rhs, {2, rep.dim()}, std::nullopt, 0};
}

template <Scalar T>
T fn(FcrFunction f, const RelationPoint<T>& pt) {
  return fcr_function(f, pt.x, pt.y);
}

template <Scalar T>
Sides<T> fcr_ab(const RelationPoint<T>& pt) {
  const auto bx = double_row_blocks(pt.x, pt.params());
  const auto by = double_row_blocks(pt.y, pt.params());
  Matrix<T> rhs = by.b * bx.a * fn(FcrFunction::kF, pt);
  rhs.add_scaled(fn(FcrFunction::kGA, pt), bx.b * by.a);
  rhs.add_scaled(fn(FcrFunction::kGD, pt), bx.b * by.d_tilde(pt.y));
  return {bx.a * by.b, rhs, {}, std::nullopt, 0};
}

template <Scalar T>
Sides<T> fcr_db(const RelationPoint<T>& pt) {
  const auto bx = double_row_blocks(pt.x, pt.params());
  const auto by = double_row_blocks(pt.y, pt.params());
  const auto dtx = bx.d_tilde(pt.x);
  Matrix<T> rhs = by.b * dtx * fn(FcrFunction::kH, pt);
  rhs.add_scaled(fn(FcrFunction::kKA, pt), bx.b * by.a);
  rhs.add_scaled(fn(FcrFunction::kKD, pt), bx.b * by.d_tilde(pt.y));
  return {dtx * by.b, rhs, {}, std::nullopt, 0};
}

// Both forms of [C(x), B(y)], stacked side by side so one residual covers them.
template <Scalar T>
Sides<T> fcr_cb(const RelationPoint<T>& pt) {
  const auto bx = double_row_blocks(pt.x, pt.params());
  const auto by = double_row_blocks(pt.y, pt.params());
  const T one(1);
  const auto comm = bx.c * by.b - by.b * bx.c;

  Matrix<T> first = (by.a * bx.a - bx.d * by.d) * checked_inverse(T(one + pt.x + pt.y), "fcr-cb");
  first.add_scaled(-fn(FcrFunction::kMAD, pt), bx.a * by.d - by.a * bx.d);

  const auto dtx = bx.d_tilde(pt.x);
  const auto dty = by.d_tilde(pt.y);
  Matrix<T> second = dtx * dty * fn(FcrFunction::kLDD, pt);
  second.add_scaled(fn(FcrFunction::kLAA, pt), bx.a * by.a);
  second.add_scaled(fn(FcrFunction::kMAA, pt), by.a * bx.a);
  second.add_scaled(fn(FcrFunction::kMAD, pt), by.a * dtx);
  second.add_scaled(fn(FcrFunction::kLAD, pt), bx.a * dty);
  second.add_scaled(fn(FcrFunction::kLDA, pt), dtx * by.a);

  const std::size_t n = comm.rows();
  Matrix<T> lhs(n, 2 * n);
  Matrix<T> rhs(n, 2 * n);
  lhs.set_block(0, 0, comm);
  lhs.set_block(0, n, comm);
  rhs.set_block(0, 0, first);
  rhs.set_block(0, n, second);
  return {lhs, rhs, {}, std::nullopt, 0};
}

// Operators on Fock ⊗ V for the Q-operator exchange relations.
template <Scalar T>
struct OscFrame {
  FockSpace<T> fock;
  std::size_t space_dim;
  Matrix<T> u;
  Matrix<T> a;
  Matrix<T> adag;
  Matrix<T> num;
  Matrix<T> one;
  AuxBlockOperator<T> at_y;
  std::vector<std::size_t> dims;

  Matrix<T> chain(const Matrix<T>& m) const { return kron(id<T>(fock.dim()), m); }
};

template <Scalar T>
OscFrame<T> osc_frame(const RelationPoint<T>& pt) {
  const auto params = pt.params();
  OscFrame<T> f{build_fock<T>(pt.cutoff + oscillator_margin(pt.n_sites, pt.twice_s)),
                params.space_dim(), {}, {}, {}, {}, {}, {}, {}};
  const auto rep = build_spin_rep<T>(pt.twice_s);
  f.u = double_row_q(pt.x, params, f.fock, rep);
  const auto iv = id<T>(f.space_dim);
  f.a = kron(f.fock.a, iv);
  f.adag = kron(f.fock.adag, iv);
  f.num = kron(f.fock.num, iv);
  f.one = id<T>(f.u.rows());
  f.at_y = double_row_blocks(pt.y, params);
  f.dims = {f.fock.dim(), f.space_dim};
  return f;
}

template <Scalar T>
Sides<T> qfcr(const RelationPoint<T>& pt, bool second) {
  const auto f = osc_frame(pt);
  const T one(1);
  const auto a = f.chain(f.at_y.a);
  const auto b = f.chain(f.at_y.b);
  const auto c = f.chain(f.at_y.c);
  const auto d = f.chain(f.at_y.d);
  const auto& u = f.u;
  Matrix<T> shift_p = f.one * T(pt.x + pt.y + one) + f.num;
  Matrix<T> shift_m = f.one * T(pt.x - pt.y + one) + f.num;
  if (!second) {
    const auto lhs = u * a + f.adag * u * f.a * a + u * f.adag * c + f.adag * u * shift_p * c;
    const auto rhs = a * u + a * f.adag * u * f.a + b * f.a * u + b * shift_p * u * f.a;
    return {lhs, rhs, f.dims, std::size_t{0}, pt.cutoff};
  }
  const auto lhs = u * b + f.adag * u * f.a * b + u * f.adag * d + f.adag * u * shift_p * d;
  const auto rhs = a * u * f.adag + a * f.adag * u * shift_m + b * f.a * u * f.adag + b * shift_p * u * shift_m;
  return {lhs, rhs, f.dims, std::size_t{0}, pt.cutoff};
}

template <Scalar T>
Sides<T> ub_exchange(const RelationPoint<T>& pt) {
  const auto f = osc_frame(pt);
  const T one(1);
  const T two = num<T>(2);
  const T xy = (pt.x - pt.y) * (pt.x + pt.y + one);
  const auto a = f.chain(f.at_y.a);
  const auto b = f.chain(f.at_y.b);
  const auto c = f.chain(f.at_y.c);
  const auto d = f.chain(f.at_y.d);
  const auto& u = f.u;
  const auto su = conjugation_sum(u, f.fock.dim(), f.space_dim);
  const auto ut = u + f.adag * u * f.a;
  const auto ut_ad = ut * f.adag;
  const auto ad_u = f.adag * u;

  Matrix<T> ca = ut_ad;
  ca.add_scaled(T(pt.x - pt.y), ad_u);
  Matrix<T> cd = ut_ad;
  cd.add_scaled(T(pt.x + pt.y), ad_u);
  Matrix<T> cc = ut_ad * f.adag;
  cc.add_scaled(T(two * pt.x), ad_u * f.adag);
  cc.add_scaled(xy, f.adag * f.adag * su);

  Matrix<T> rhs = b * su * xy;
  rhs += ca * a;
  rhs -= cd * d;
  rhs += cc * c;
  return {ut * b, rhs, f.dims, std::size_t{0}, pt.cutoff};
}

template <Scalar T>
Sides<T> mtilde_inverse(const RelationPoint<T>& pt) {
  const auto params = pt.params();
  const auto fock = build_fock<T>(pt.cutoff + oscillator_margin(pt.n_sites, pt.twice_s));
  const auto u = double_row_q(pt.x, params, fock, build_spin_rep<T>(pt.twice_s));
  const auto iv = id<T>(params.space_dim());
  const auto ut = u + kron(fock.adag, iv) * u * kron(fock.a, iv);
  return {u, conjugation_sum(ut, fock.dim(), params.space_dim()), {fock.dim(), params.space_dim()}, std::size_t{0},
          pt.cutoff};
}

template <Scalar T>
Sides<T> trace_conj(const RelationPoint<T>& pt) {
  const OscillatorTrace<T> tr(pt.x, pt.params(), pt.cutoff);
  const auto su = conjugation_sum(tr.u(), tr.fock().dim(), tr.space_dim());
  const auto j = static_cast<std::size_t>(pt.j);
  const auto lhs = tr.weighted_trace(su, tr.w_coefficients(pt.i, WNormalization::kShifted), j).value;
  const auto rhs = tr.weighted_trace(tr.u(), tr.w_coefficients(pt.i + 1, WNormalization::kShifted), j).value;
  return {lhs, rhs, {}, std::nullopt, 0};
}

template <Scalar T>
Sides<T> wb_exchange(const RelationPoint<T>& pt) {
  const OscillatorTrace<T> tr(pt.x, pt.params(), pt.cutoff);
  const auto at_y = double_row_blocks(pt.y, pt.params());
  const auto j = static_cast<std::size_t>(pt.j);
  const auto wij = tr.w(pt.i, j).value;
  const auto wi2 = tr.w(pt.i + 2, j).value;
  const T one(1);
  Matrix<T> rhs = at_y.b * wi2 * T((pt.x - pt.y) * (pt.x + pt.y + one));
  rhs += tr.x_op(pt.i, j, pt.y, at_y);
  return {wij * at_y.b, rhs, {}, std::nullopt, 0};
}

template <Scalar T>
Sides<T> sides(Relation relation, const RelationPoint<T>& pt) {
  switch (relation) {
    case Relation::kBybeA:
      return bybe_a(pt);
    case Relation::kBybeB:
      return bybe_b(pt);
    case Relation::kBybe1:
      return bybe_1(pt);
    case Relation::kBybe2:
      return bybe_2(pt);
    case Relation::kRll:
      return rll(pt);
    case Relation::kUnitarity:
      return unitarity(pt);
    case Relation::kFcrAB:
      return fcr_ab(pt);
    case Relation::kFcrDB:
      return fcr_db(pt);
    case Relation::kFcrCB:
      return fcr_cb(pt);
    case Relation::kQfcrI:
      return qfcr(pt, false);
    case Relation::kQfcrII:
      return qfcr(pt, true);
    case Relation::kUbExchange:
      return ub_exchange(pt);
    case Relation::kMtildeInverse:
      return mtilde_inverse(pt);
    case Relation::kTraceConj:
      return trace_conj(pt);
    case Relation::kWbExchange:
      return wb_exchange(pt);
  }
  throw ConfigError("unknown relation");
}

bool uses_trace_indices(Relation r) { return r == Relation::kTraceConj || r == Relation::kWbExchange; }

// Trace summands decay like n^{2m+2Ns·2-p-q-1}; keep p and q well inside the
// convergent region so a cutoff of a few dozen suffices.
Rational shifted_positive(std::mt19937_64& rng, int n_sites, int twice_s) {
  Rational r = random_rational(rng);
  if (r < Rational(0)) r = -r;
  r += Rational(8 + 2L * n_sites * twice_s);
  return r;
}

}  // namespace

std::string_view relation_id(Relation r) {
  for (const auto& [key, id] : kRelationIds) {
    if (key == r) return id;
  }
  return "?";
}

Relation parse_relation(std::string_view id) {
  std::string lower(id);
  for (auto& c : lower) {
    c = static_cast<char>(c == '_' ? '-' : std::tolower(static_cast<unsigned char>(c)));
  }
  for (const auto& [key, name] : kRelationIds) {
    if (name == lower) return key;
  }
  throw ConfigError("unknown relation id '" + std::string(id) + "'");
}

const std::vector<Relation>& all_relations() {
  static const std::vector<Relation> relations = [] {
    std::vector<Relation> out;
    for (const auto& entry : kRelationIds) out.push_back(entry.first);
    return out;
  }();
  return relations;
}

bool is_truncated_sum(Relation r) { return uses_trace_indices(r); }

template <Scalar T>
Matrix<T> conjugation_sum(const Matrix<T>& o, std::size_t fock_dim, std::size_t space_dim) {
  if (o.rows() != fock_dim * space_dim || o.cols() != o.rows()) {
    throw DimensionError("conjugation_sum: operator is not on Fock ⊗ V");
  }
  Matrix<T> out(o.rows(), o.cols());
  for (std::size_t n = 0; n < fock_dim; ++n) {
    for (std::size_t np = 0; np < fock_dim; ++np) {
      T weight(1);
      for (std::size_t k = 0; k <= std::min(n, np); ++k) {
        if (k > 0) weight *= -num<T>(static_cast<long>(np - k + 1));
        for (std::size_t r = 0; r < space_dim; ++r) {
          for (std::size_t c = 0; c < space_dim; ++c) {
            const T& v = o((n - k) * space_dim + r, (np - k) * space_dim + c);
            if (!ScalarTraits<T>::is_zero(v)) add_product(out(n * space_dim + r, np * space_dim + c), weight, v);
          }
        }
      }
    }
  }
  return out;
}

template <Scalar T>
ResidualReport check_relation(Relation relation, const RelationPoint<T>& point, double tolerance) {
  point.params().validate();
  if (uses_trace_indices(relation) && (point.i < 0 || point.j < 0)) {
    throw ConfigError("trace relations need i, j ≥ 0");
  }
  const auto s = sides(relation, point);
  const auto m = measure(s);

  ResidualReport r;
  r.relation = relation;
  r.backend = std::string(ScalarTraits<T>::kName);
  r.x = ScalarTraits<T>::to_string(point.x);
  r.y = ScalarTraits<T>::to_string(point.y);
  r.p = ScalarTraits<T>::to_string(point.p);
  r.q = ScalarTraits<T>::to_string(point.q);
  r.n_sites = point.n_sites;
  r.twice_s = point.twice_s;
  r.cutoff = point.cutoff;
  r.i = point.i;
  r.j = point.j;
  r.residual = m.residual;
  r.scale = m.scale;
  r.exact = ScalarTraits<T>::kExact && m.zero;
  if (ScalarTraits<T>::kExact && !is_truncated_sum(relation)) {
    r.passed = r.exact;
  } else {
    r.passed = m.residual <= tolerance * std::max(1.0, m.scale);
  }
  return r;
}

Rational random_rational(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> numerator(1, 12);
  std::uniform_int_distribution<long> denominator(1, 12);
  std::bernoulli_distribution negative(0.5);
  const long n = numerator(rng);
  return Rational(negative(rng) ? -n : n, denominator(rng));
}

RelationPoint<Rational> random_point(Relation relation, int n_sites, int twice_s, std::size_t cutoff,
                                     std::mt19937_64& rng) {
  RelationPoint<Rational> pt;
  pt.n_sites = n_sites;
  pt.twice_s = twice_s;
  pt.cutoff = cutoff;
  pt.x = random_rational(rng);
  pt.y = random_rational(rng);
  if (is_truncated_sum(relation)) {
    pt.p = shifted_positive(rng, n_sites, twice_s);
    pt.q = shifted_positive(rng, n_sites, twice_s);
    std::uniform_int_distribution<int> index(0, 2);
    pt.i = index(rng);
    pt.j = index(rng);
  } else {
    pt.p = random_rational(rng);
    pt.q = random_rational(rng);
  }
  return pt;
}

template <Scalar T>
std::vector<ResidualReport> run_suite(const SuiteConfig& config) {
  if (config.points < 1) throw ConfigError("suite needs at least one point");
  if (config.shapes.empty()) throw ConfigError("suite needs at least one (sites, spin) shape");
  const auto& relations = config.relations.empty() ? all_relations() : config.relations;
  const std::size_t per = static_cast<std::size_t>(config.points);
  const std::size_t total = relations.size() * per;
  std::vector<std::optional<ResidualReport>> results(total);
  std::vector<std::exception_ptr> errors(total);

  auto task = [&](std::size_t t) {
    const std::size_t ri = t / per;
    const std::size_t pi = t % per;
    const Relation rel = relations[ri];
    const auto [n_sites, twice_s] = config.shapes[pi % config.shapes.size()];
    const auto rel_index = static_cast<std::uint32_t>(rel);
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      rel_index, static_cast<std::uint32_t>(pi)};
    std::mt19937_64 rng(seq);
    const std::size_t cutoff = is_truncated_sum(rel) ? config.trace_cutoff : config.cutoff;
    constexpr int kMaxRedraws = 100;
    try {
      for (int attempt = 0;; ++attempt) {
        const auto pt = random_point(rel, n_sites, twice_s, cutoff, rng);
        try {
          results[t] = check_relation<T>(rel, convert_point<T>(pt), config.tolerance);
          return;
        } catch (const PoleError&) {
          if (attempt + 1 >= kMaxRedraws) throw;
        }
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };

  const auto workers = static_cast<std::size_t>(std::max(1, config.threads));
  if (workers == 1) {
    for (std::size_t t = 0; t < total; ++t) task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, total); ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < total; t = next++) task(t);
      });
    }
  }
  std::vector<ResidualReport> out;
  out.reserve(total);
  for (std::size_t t = 0; t < total; ++t) {
    if (errors[t]) std::rethrow_exception(errors[t]);
    out.push_back(std::move(*results[t]));
  }
  return out;
}

#define OPENQ_INSTANTIATE(T)                                                                     \
  template Matrix<T> conjugation_sum<T>(const Matrix<T>&, std::size_t, std::size_t);            \
  template ResidualReport check_relation<T>(Relation, const RelationPoint<T>&, double);          \
  template std::vector<ResidualReport> run_suite<T>(const SuiteConfig&);

OPENQ_INSTANTIATE(Rational)
OPENQ_INSTANTIATE(Complex)

#undef OPENQ_INSTANTIATE

}  // namespace openq
