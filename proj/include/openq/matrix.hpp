#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "openq/error.hpp"
#include "openq/scalar.hpp"

namespace openq {

template <Scalar T>
using Vector = std::vector<T>;

/// Dense row-major matrix over one scalar backend.
///
/// Products skip zero entries on both sides, which is what keeps the exact
/// backend usable: every operator built here (Lax operators, monodromies on
/// Fock space) is banded in the number grading.
template <Scalar T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  static Matrix diagonal(const std::vector<T>& entries) {
    Matrix m(entries.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) {
      if (!ScalarTraits<T>::is_zero(o.data_[k])) data_[k] += o.data_[k];
    }
    return *this;
  }

  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) {
      if (!ScalarTraits<T>::is_zero(o.data_[k])) data_[k] -= o.data_[k];
    }
    return *this;
  }

  Matrix& operator*=(const T& c) {
    for (auto& v : data_) {
      if (!ScalarTraits<T>::is_zero(v)) v *= c;
    }
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, const T& c) { return a *= c; }
  friend Matrix operator*(const T& c, Matrix a) { return a *= c; }
  Matrix operator-() const { return *this * T(-1); }

  friend Matrix operator*(const Matrix& a, const Matrix& b) { return a.multiply(b); }

  /// Adds c*o in place (skipping zeros of o).
  void add_scaled(const T& c, const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) {
      if (!ScalarTraits<T>::is_zero(o.data_[k])) add_product(data_[k], c, o.data_[k]);
    }
  }

  Matrix multiply(const Matrix& b) const {
    if (cols_ != b.rows_) throw DimensionError("matrix product: inner dimensions differ");
    Matrix c(rows_, b.cols_);
    const auto b_nonzeros = b.row_nonzeros();
    for (std::size_t i = 0; i < rows_; ++i) {
      T* crow = &c.data_[i * c.cols_];
      for (std::size_t k = 0; k < cols_; ++k) {
        const T& aik = data_[i * cols_ + k];
        if (ScalarTraits<T>::is_zero(aik)) continue;
        const T* brow = &b.data_[k * b.cols_];
        for (std::size_t j : b_nonzeros[k]) add_product(crow[j], aik, brow[j]);
      }
    }
    return c;
  }

  Vector<T> apply(const Vector<T>& v) const {
    if (v.size() != cols_) throw DimensionError("matrix-vector product: size mismatch");
    Vector<T> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = 0; k < cols_; ++k) {
        const T& aik = data_[i * cols_ + k];
        if (!ScalarTraits<T>::is_zero(aik) && !ScalarTraits<T>::is_zero(v[k])) add_product(out[i], aik, v[k]);
      }
    }
    return out;
  }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("block out of range");
    Matrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
      for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    }
    return out;
  }

  void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_) throw DimensionError("block out of range");
    for (std::size_t i = 0; i < b.rows_; ++i) {
      for (std::size_t j = 0; j < b.cols_; ++j) (*this)(r0 + i, c0 + j) = b(i, j);
    }
  }

  bool is_zero() const {
    for (const auto& v : data_) {
      if (!ScalarTraits<T>::is_zero(v)) return false;
    }
    return true;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    }
    return t;
  }

  std::vector<std::vector<std::size_t>> row_nonzeros() const {
    std::vector<std::vector<std::size_t>> nz(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!ScalarTraits<T>::is_zero(data_[i * cols_ + j])) nz[i].push_back(j);
      }
    }
    return nz;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <Scalar T>
Matrix<T> kron(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (ScalarTraits<T>::is_zero(a(i, j))) continue;
      for (std::size_t k = 0; k < b.rows(); ++k) {
        for (std::size_t l = 0; l < b.cols(); ++l) {
          if (!ScalarTraits<T>::is_zero(b(k, l))) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
        }
      }
    }
  }
  return out;
}

/// Embeds `op`, acting on the tensor factors listed in `positions` (in that
/// order), into the full product space with factor sizes `dims`. Factor 0 is
/// the leftmost (slowest-varying) index.
template <Scalar T>
Matrix<T> lift(const Matrix<T>& op, const std::vector<std::size_t>& positions,
               const std::vector<std::size_t>& dims) {
  std::size_t sub = 1;
  for (auto p : positions) {
    if (p >= dims.size()) throw DimensionError("lift: factor index out of range");
    sub *= dims[p];
  }
  if (op.rows() != sub || op.cols() != sub) throw DimensionError("lift: operator size does not match factors");
  std::size_t total = 1;
  for (auto d : dims) total *= d;

  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) stride[k - 1] = stride[k] * dims[k];

  const auto nz = op.row_nonzeros();
  Matrix<T> out(total, total);
  std::vector<std::size_t> digits(dims.size());
  for (std::size_t row = 0; row < total; ++row) {
    std::size_t rest = row;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      digits[k] = rest / stride[k];
      rest %= stride[k];
    }
    std::size_t r = 0;
    std::size_t base = row;
    for (auto p : positions) {
      r = r * dims[p] + digits[p];
      base -= digits[p] * stride[p];
    }
    for (std::size_t c : nz[r]) {
      std::size_t col = base;
      std::size_t cc = c;
      for (std::size_t k = positions.size(); k-- > 0;) {
        const auto p = positions[k];
        col += (cc % dims[p]) * stride[p];
        cc /= dims[p];
      }
      out(row, col) = op(r, c);
    }
  }
  return out;
}

template <Scalar T>
Matrix<T> commutator(const Matrix<T>& a, const Matrix<T>& b) {
  return a * b - b * a;
}

template <Scalar T>
double max_abs(const Matrix<T>& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) best = std::max(best, magnitude(m(i, j)));
  }
  return best;
}

template <Scalar T>
double max_abs(const Vector<T>& v) {
  double best = 0.0;
  for (const auto& e : v) best = std::max(best, magnitude(e));
  return best;
}

template <Scalar T>
double norm2(const Vector<T>& v) {
  double s = 0.0;
  for (const auto& e : v) {
    const double m = magnitude(e);
    s += m * m;
  }
  return std::sqrt(s);
}

template <Scalar T>
Matrix<Complex> to_complex(const Matrix<T>& m) {
  Matrix<Complex> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = ScalarTraits<T>::to_complex(m(i, j));
  }
  return out;
}

/// Converts a rational matrix into the requested backend.
template <Scalar T>
Matrix<T> from_rational(const Matrix<Rational>& m) {
  if constexpr (std::same_as<T, Rational>) {
    return m;
  } else {
    return to_complex(m);
  }
}

/// Eigenvalues sorted by real part, then imaginary part.
std::vector<Complex> eigenvalues(const Matrix<Complex>& m);

}  // namespace openq
