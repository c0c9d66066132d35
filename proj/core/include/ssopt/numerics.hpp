#pragma once

#include <functional>

#include "ssopt/core.hpp"

namespace ssopt::numerics {

/// Moore-Penrose pseudoinverse by SVD. Singular values at or below
/// max(rows, cols) * sigma_max * eps are treated as zero.
Matrix pinv(const Matrix& m);

/// Solves A X = B with partial-pivot LU. Throws SingularMatrixError when a
/// pivot is below 1e-14 * ||A||_inf.
Matrix solve(const Matrix& a, const Matrix& b);

/// Central-difference Jacobian; the step for coordinate j is h * (1 + |x_j|).
/// Quotients use the rounded perturbed coordinates, so linear maps are exact.
Matrix finite_diff_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& x,
                            double h = 1e-6);

double inf_norm(const Matrix& m);  // max row sum
double max_abs(const Matrix& m);

}  // namespace ssopt::numerics
