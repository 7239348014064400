#include "openq/matrix.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

namespace openq {

std::vector<Complex> eigenvalues(const Matrix<Complex>& m) {
  if (m.rows() != m.cols()) throw DimensionError("eigenvalues: matrix is not square");
  Eigen::MatrixXcd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(e, false);
  if (solver.info() != Eigen::Success) throw ConvergenceError("eigenvalue solver did not converge");
  std::vector<Complex> out(solver.eigenvalues().data(), solver.eigenvalues().data() + m.rows());
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

}  // namespace openq
