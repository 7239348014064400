#include "openq/scalar.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

namespace openq {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

mpz_class pow10(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

mpq_class parse_decimal(std::string_view s, std::string_view original) {
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string exp_text(s.substr(e + 1));
    std::size_t used = 0;
    try {
      exponent = std::stol(exp_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != exp_text.size()) {
      throw ConfigError("cannot parse number '" + std::string(original) + "'");
    }
    s = s.substr(0, e);
  }
  std::string digits;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto whole = s.substr(0, dot);
    auto frac = s.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (whole.empty() && frac.empty())) {
      throw ConfigError("cannot parse number '" + std::string(original) + "'");
    }
    digits = std::string(whole) + std::string(frac);
    exponent -= static_cast<long>(frac.size());
  } else {
    if (!all_digits(s)) throw ConfigError("cannot parse number '" + std::string(original) + "'");
    digits = std::string(s);
  }
  mpq_class value{mpz_class(digits, 10)};
  if (exponent > 0) value *= pow10(static_cast<unsigned long>(exponent));
  if (exponent < 0) value /= pow10(static_cast<unsigned long>(-exponent));
  value.canonicalize();
  return negative ? mpq_class(-value) : value;
}

}  // namespace

Rational::Rational(long num, long den) {
  if (den == 0) throw PoleError("pole: zero denominator");
  v_ = mpq_class(num, den);
  v_.canonicalize();
}

Rational::Rational(mpq_class value) : v_(std::move(value)) { v_.canonicalize(); }

Rational Rational::parse(std::string_view text) {
  auto s = trim(text);
  if (s.empty()) throw ConfigError("empty number");
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = trim(s.substr(0, slash));
    auto den = trim(s.substr(slash + 1));
    mpq_class n = parse_decimal(num, text);
    mpq_class d = parse_decimal(den, text);
    if (sgn(d) == 0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    return Rational(mpq_class(n / d));
  }
  return Rational(parse_decimal(s, text));
}

Rational& Rational::operator+=(const Rational& o) {
  v_ += o.v_;
  return *this;
}
Rational& Rational::operator-=(const Rational& o) {
  v_ -= o.v_;
  return *this;
}
Rational& Rational::operator*=(const Rational& o) {
  v_ *= o.v_;
  return *this;
}
Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw PoleError("pole: division by zero");
  v_ /= o.v_;
  return *this;
}

void Rational::add_product(const Rational& a, const Rational& b) {
  thread_local mpq_class scratch;
  mpq_mul(scratch.get_mpq_t(), a.v_.get_mpq_t(), b.v_.get_mpq_t());
  mpq_add(v_.get_mpq_t(), v_.get_mpq_t(), scratch.get_mpq_t());
}

Rational Rational::operator-() const { return Rational(mpq_class(-v_)); }

std::string Rational::str() const { return v_.get_str(); }

std::string ScalarTraits<Complex>::to_string(const Complex& v) {
  char buf[64];
  // Adding 0.0 folds -0 into +0 so equal values print identically.
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", v.real() + 0.0, v.imag() + 0.0);
  return buf;
}

template <>
Rational parse_scalar<Rational>(std::string_view text) {
  return Rational::parse(text);
}

template <>
Complex parse_scalar<Complex>(std::string_view text) {
  auto s = trim(text);
  if (s.empty()) throw ConfigError("empty number");
  if (s.back() != 'i') return {Rational::parse(s).to_double(), 0.0};
  s.remove_suffix(1);
  // Split at the last sign that is not leading and not part of an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_of = [&](std::string_view part) {
    part = trim(part);
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    return Rational::parse(part).to_double();
  };
  if (split == std::string_view::npos) return {0.0, imag_of(s)};
  return {Rational::parse(s.substr(0, split)).to_double(), imag_of(s.substr(split))};
}

}  // namespace openq
