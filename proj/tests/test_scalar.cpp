#include "doctest.h"
#include "openq/matrix.hpp"
#include "openq/scalar.hpp"

using namespace openq;

TEST_CASE("rational parsing and arithmetic") {
  CHECK(Rational::parse("6/8") == Rational(3, 4));
  CHECK(Rational::parse("-0.125") == Rational(-1, 8));
  CHECK(Rational::parse("1e-3") == Rational(1, 1000));
  CHECK(Rational::parse(" 7 ") == Rational(7));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK((Rational(2, 3) * Rational(9, 4)).str() == "3/2");
  CHECK_THROWS_AS(Rational::parse("1/0"), ConfigError);
  CHECK_THROWS_AS(Rational::parse("abc"), ConfigError);
  CHECK_THROWS_AS(Rational(1) / Rational(0), PoleError);
}

TEST_CASE("add_product matches the naive expression") {
  Rational acc(1, 5);
  acc.add_product(Rational(2, 3), Rational(-7, 11));
  CHECK(acc == Rational(1, 5) + Rational(2, 3) * Rational(-7, 11));
}

TEST_CASE("complex parsing") {
  CHECK(parse_scalar<Complex>("1/4") == Complex(0.25, 0.0));
  CHECK(parse_scalar<Complex>("1.5-2i") == Complex(1.5, -2.0));
  CHECK(parse_scalar<Complex>("2.5e-1+1e+1i") == Complex(0.25, 10.0));
  CHECK(parse_scalar<Complex>("-3i") == Complex(0.0, -3.0));
}

TEST_CASE("complex formatting folds negative zero") {
  CHECK(ScalarTraits<Complex>::to_string(Complex(-0.0, -0.0)) == "0+0i");
  CHECK(ScalarTraits<Complex>::to_string(Complex(1.5, -2.0)) == "1.5-2i");
}

TEST_CASE("checked_inverse guards poles in both backends") {
  CHECK_THROWS_AS(checked_inverse(Rational(0), "test"), PoleError);
  CHECK_THROWS_AS(checked_inverse(Complex(1e-14, 0.0), "test"), PoleError);
  CHECK(checked_inverse(Rational(-2, 7), "test") == Rational(-7, 2));
}

TEST_CASE("ipow") {
  CHECK(ipow(Rational(-2, 3), 5) == Rational(-32, 243));
  CHECK(ipow(Rational(5), 0) == Rational(1));
}

TEST_CASE("kron dimensions and entries") {
  Matrix<Rational> a(2, 2);
  a(0, 1) = Rational(3);
  a(1, 0) = Rational(1, 2);
  const auto id = Matrix<Rational>::identity(3);
  const auto k = kron(a, id);
  REQUIRE(k.rows() == 6);
  CHECK(k(0, 3) == Rational(3));
  CHECK(k(2, 5) == Rational(3));
  CHECK(k(4, 1) == Rational(1, 2));
  CHECK(k(0, 0) == Rational(0));
}

TEST_CASE("lift places a one-site operator on the right factor") {
  Matrix<Rational> s(2, 2);
  s(0, 1) = Rational(1);
  const auto lifted = lift(s, {1}, {2, 2, 2});
  CHECK(lifted == kron(kron(Matrix<Rational>::identity(2), s), Matrix<Rational>::identity(2)));
}

TEST_CASE("eigenvalues of a triangular matrix are its diagonal, sorted") {
  Matrix<Complex> m(3, 3);
  m(0, 0) = 3.0;
  m(1, 1) = -1.0;
  m(2, 2) = 2.0;
  m(0, 2) = 5.0;
  const auto ev = eigenvalues(m);
  REQUIRE(ev.size() == 3);
  CHECK(ev[0].real() == doctest::Approx(-1.0));
  CHECK(ev[1].real() == doctest::Approx(2.0));
  CHECK(ev[2].real() == doctest::Approx(3.0));
}

TEST_CASE("shape mismatches raise DimensionError") {
  CHECK_THROWS_AS(Matrix<Rational>(2, 3) * Matrix<Rational>(2, 3), DimensionError);
  CHECK_THROWS_AS(Matrix<Rational>(2, 2) + Matrix<Rational>(3, 3), DimensionError);
}
