#include "ssopt/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "ssopt/errors.hpp"

namespace ssopt::numerics {

double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

Matrix pinv(const Matrix& m) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  if (!m.allFinite()) throw NumericalFailure("pinv: non-finite input");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  if (!sigma.allFinite()) throw NumericalFailure("pinv: SVD did not converge");
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  const double cutoff = static_cast<double>(std::max(m.rows(), m.cols())) * sigma_max *
                        std::numeric_limits<double>::epsilon();
  Vector inv_sigma = Vector::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) inv_sigma(i) = 1.0 / sigma(i);
  }
  return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose();
}

Matrix solve(const Matrix& a, const Matrix& b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("solve: matrix must be square");
  if (b.rows() != n) throw std::invalid_argument("solve: right-hand side has wrong row count");
  if (!a.allFinite() || !b.allFinite()) throw NumericalFailure("solve: non-finite input");

  const double threshold = 1e-14 * inf_norm(a);
  Matrix lu = a;
  Matrix x = b;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index pivot = k;
    lu.col(k).tail(n - k).cwiseAbs().maxCoeff(&pivot);
    pivot += k;
    if (!(std::abs(lu(pivot, k)) > threshold)) {
      throw SingularMatrixError("solve: pivot " + std::to_string(k) + " below 1e-14*||A||_inf");
    }
    if (pivot != k) {
      lu.row(k).swap(lu.row(pivot));
      x.row(k).swap(x.row(pivot));
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double factor = lu(i, k) / lu(k, k);
      if (factor == 0.0) continue;
      lu.row(i).tail(n - k) -= factor * lu.row(k).tail(n - k);
      x.row(i) -= factor * x.row(k);
    }
  }
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    if (k + 1 < n) x.row(k) -= lu.row(k).tail(n - k - 1) * x.bottomRows(n - k - 1);
    x.row(k) /= lu(k, k);
  }
  return x;
}

Matrix finite_diff_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& x,
                            double h) {
  const Vector f0 = fn(x);
  Matrix jac(f0.size(), x.size());
  Vector probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = h * (1.0 + std::abs(x(j)));
    const double hi = x(j) + step;
    const double lo = x(j) - step;
    probe(j) = hi;
    const Vector plus = fn(probe);
    probe(j) = lo;
    const Vector minus = fn(probe);
    probe(j) = x(j);
    if (!plus.allFinite() || !minus.allFinite()) {
      throw NumericalFailure("finite_diff_jacobian: non-finite value perturbing coordinate " +
                             std::to_string(j));
    }
    jac.col(j) = (plus - minus) / (hi - lo);
  }
  return jac;
}

}  // namespace ssopt::numerics
