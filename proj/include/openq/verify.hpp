#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "openq/lattice.hpp"

namespace openq {

enum class Relation {
  kBybeA,
  kBybeB,
  kBybe1,
  kBybe2,
  kRll,
  kUnitarity,
  kFcrAB,
  kFcrDB,
  kFcrCB,
  kQfcrI,
  kQfcrII,
  kUbExchange,
  kMtildeInverse,
  kTraceConj,
  kWbExchange,
};

std::string_view relation_id(Relation r);
/// Parses ids such as "bybe-a" or "wb-exchange" (case-insensitive).
Relation parse_relation(std::string_view id);
const std::vector<Relation>& all_relations();

/// Polynomial relations hold exactly; the others compare truncated traces.
bool is_truncated_sum(Relation r);

template <Scalar T>
struct RelationPoint {
  T x{};
  T y{};
  T p{};
  T q{};
  int n_sites = 1;
  int twice_s = 1;
  std::size_t cutoff = 6;
  int i = 0;
  int j = 0;

  ChainParams<T> params() const { return {n_sites, twice_s, p, q}; }
};

struct ResidualReport {
  Relation relation = Relation::kBybeA;
  std::string backend;
  std::string x, y, p, q;
  int n_sites = 0;
  int twice_s = 0;
  std::size_t cutoff = 0;
  int i = 0;
  int j = 0;
  /// Max-norm of LHS - RHS.
  double residual = 0.0;
  /// Max-norm of the LHS, for relative comparisons.
  double scale = 0.0;
  /// True only for the rational backend with a literally zero residual.
  bool exact = false;
  bool passed = false;
};

/// Max-norm residual of one relation at one point. `tolerance` applies to
/// float results relative to max(1, scale); exact results must vanish.
template <Scalar T>
ResidualReport check_relation(Relation relation, const RelationPoint<T>& point, double tolerance = 1e-9);

/// Σ_k (-1)^k ā^k O a^k on Fock⊗V (finite per matrix element).
template <Scalar T>
Matrix<T> conjugation_sum(const Matrix<T>& o, std::size_t fock_dim, std::size_t space_dim);

/// Rational with numerator and denominator of magnitude at most 12, nonzero.
Rational random_rational(std::mt19937_64& rng);

/// A random point for `relation`. Truncated-sum relations get p, q ≥ 8 + 2N·2s so the
/// oscillator trace converges quickly.
RelationPoint<Rational> random_point(Relation relation, int n_sites, int twice_s, std::size_t cutoff,
                                     std::mt19937_64& rng);

struct SuiteConfig {
  std::vector<Relation> relations;
  int points = 20;
  /// (n_sites, twice_s) pairs cycled over the points.
  std::vector<std::pair<int, int>> shapes{{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  std::size_t cutoff = 6;
  std::size_t trace_cutoff = 32;
  std::uint64_t seed = 1;
  int threads = 1;
  double tolerance = 1e-9;
};

/// Runs every (relation, point) pair; output order is independent of the
/// thread count. Points hitting a pole are redrawn from the same stream.
template <Scalar T>
std::vector<ResidualReport> run_suite(const SuiteConfig& config);

template <Scalar T>
RelationPoint<T> convert_point(const RelationPoint<Rational>& p) {
  auto c = [](const Rational& v) { return ScalarTraits<T>::from_rational(v); };
  return {c(p.x), c(p.y), c(p.p), c(p.q), p.n_sites, p.twice_s, p.cutoff, p.i, p.j};
}

}  // namespace openq
