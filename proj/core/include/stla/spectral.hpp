#pragma once

#include <Eigen/Core>
#include <utility>

#include "stla/errors.hpp"

namespace stla {

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending,
/// eigenvector columns orthonormal.
struct EigenResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  double residual = 0.0;  // max |A v - lambda v|
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-14 * ||A||. The input is symmetrized on entry.
EigenResult eig_symmetric(const Eigen::MatrixXd& a);

/// true iff lambda_min >= -tol; tol < 0 selects the default 1e-10 * ||A||.
std::pair<bool, double> is_psd(const Eigen::MatrixXd& a, double tol = -1.0);

/// Controls extracted from a nonsymmetric S through S^T S: a1 a unit
/// eigenvector with positive eigenvalue lambda^2, a2 = -S a1 / lambda. The
/// returned value is the K-quadratic -2 lambda (1 + a1.a2), negative for some
/// eigenvector whenever S is not symmetric.
struct NonsymWitness {
  Eigen::VectorXd a1;
  Eigen::VectorXd a2;
  double value = 0.0;
  double lambda = 0.0;
};

NonsymWitness nonsym_witness(const Eigen::MatrixXd& s);

}  // namespace stla
