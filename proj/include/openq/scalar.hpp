#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include "openq/error.hpp"

namespace openq {

/// Exact rational number backed by GMP, always in lowest terms.
/// Division by zero raises PoleError, which doubles as the exact backend's
/// pole guard.
class Rational {
 public:
  Rational() = default;
  Rational(long value) : v_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(long num, long den);
  explicit Rational(mpq_class value);

  /// Accepts "n", "n/d" and plain decimals such as "-0.125" or "1e-3".
  static Rational parse(std::string_view text);

  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  Rational operator-() const;

  friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) == 0; }
  friend bool operator<(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) < 0; }

  /// this += a*b without building a temporary Rational.
  void add_product(const Rational& a, const Rational& b);

  bool is_zero() const { return sgn(v_) == 0; }
  bool is_integer() const { return v_.get_den() == 1; }
  double to_double() const { return v_.get_d(); }
  std::string str() const;
  const mpq_class& raw() const { return v_; }

 private:
  mpq_class v_;
};

using Complex = std::complex<double>;

enum class Backend { kExact, kFloat };

template <class T>
concept Scalar = std::same_as<T, Rational> || std::same_as<T, Complex>;

/// |factor| below this counts as a pole in the float backend.
inline constexpr double kFloatPoleThreshold = 1e-12;

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool kExact = true;
  static constexpr Backend kBackend = Backend::kExact;
  static constexpr std::string_view kName = "exact";
  static bool is_zero(const Rational& v) { return v.is_zero(); }
  static bool near_pole(const Rational& v) { return v.is_zero(); }
  static double magnitude(const Rational& v) { return std::abs(v.to_double()); }
  static Complex to_complex(const Rational& v) { return {v.to_double(), 0.0}; }
  static Rational from_rational(const Rational& v) { return v; }
  static std::string to_string(const Rational& v) { return v.str(); }
};

template <>
struct ScalarTraits<Complex> {
  static constexpr bool kExact = false;
  static constexpr Backend kBackend = Backend::kFloat;
  static constexpr std::string_view kName = "float";
  static bool is_zero(const Complex& v) { return v == Complex{}; }
  static bool near_pole(const Complex& v) { return std::abs(v) < kFloatPoleThreshold; }
  static double magnitude(const Complex& v) { return std::abs(v); }
  static Complex to_complex(const Complex& v) { return v; }
  static Complex from_rational(const Rational& v) { return {v.to_double(), 0.0}; }
  static std::string to_string(const Complex& v);
};

/// acc += a*b; the rational overload avoids temporaries in hot loops.
inline void add_product(Rational& acc, const Rational& a, const Rational& b) { acc.add_product(a, b); }
inline void add_product(Complex& acc, const Complex& a, const Complex& b) { acc += a * b; }

template <Scalar T>
T from_ratio(long num, long den = 1) {
  return ScalarTraits<T>::from_rational(Rational(num, den));
}

template <Scalar T>
double magnitude(const T& v) {
  return ScalarTraits<T>::magnitude(v);
}

/// 1/v with the backend's pole guard; `context` names the factor in the error.
template <Scalar T>
T checked_inverse(const T& v, std::string_view context) {
  if (ScalarTraits<T>::near_pole(v)) {
    throw PoleError("pole: vanishing factor in " + std::string(context));
  }
  return T(1) / v;
}

template <Scalar T>
T checked_divide(const T& num, const T& den, std::string_view context) {
  return num * checked_inverse(den, context);
}

/// Integer power by repeated multiplication (exact in the rational backend).
template <Scalar T>
T ipow(T base, unsigned exponent) {
  T result(1);
  while (exponent != 0) {
    if (exponent & 1U) result *= base;
    base *= base;
    exponent >>= 1U;
  }
  return result;
}

/// Parses "n/d", decimals, and for the float backend also "re+imi" / "imi".
template <Scalar T>
T parse_scalar(std::string_view text);

template <>
Rational parse_scalar<Rational>(std::string_view text);
template <>
Complex parse_scalar<Complex>(std::string_view text);

}  // namespace openq
