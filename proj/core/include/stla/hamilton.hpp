#pragma once

#include <Eigen/Core>

#include "stla/expr.hpp"
#include "stla/system.hpp"

namespace stla {

/// S(x) = D(grad(u) sigma) sigma(x) with S_ij = H_{sigma_j, sigma_i} u, split
/// into its symmetric part S* and skew part S^e.
struct SMatrices {
  Eigen::MatrixXd S;
  Eigen::MatrixXd S_sym;   // (S + S^T)/2
  Eigen::MatrixXd S_skew;  // (S - S^T)/2
  Eigen::VectorXd at_point;
};

/// K = [[S*, S^T], [S, S*]], symmetric 2m x 2m. Its quadratic form on (a1, a2)
/// is the exact second order coefficient of u along a single-switch
/// trajectory of a symmetric system.
struct KMatrix {
  Eigen::MatrixXd K;
};

/// The extended-matrix data of an affine system, with sigma0 adjoined as
/// column zero: Stilde = [[alpha, beta^T], [gamma, S]].
struct AffineData {
  double alpha = 0.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  Eigen::MatrixXd S;
  Eigen::MatrixXd Stilde;
};

/// H_f u = -grad(u) . f(x, a).
double first_hamiltonian(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                         const Control& a);

/// H_{g,f} u = D2u f . g + grad(u) . Df g, with g = f(., outer), f = f(., inner).
double second_hamiltonian(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                          const Control& outer, const Control& inner);

SMatrices s_matrix(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x);

KMatrix k_matrix(const SMatrices& s);
KMatrix k_matrix_from(const Eigen::MatrixXd& S);

/// K (a1, a2) . (a1, a2).
double k_quadratic(const Eigen::MatrixXd& S, const Eigen::VectorXd& a1, const Eigen::VectorXd& a2);

AffineData affine_data(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x);

/// k(a1, a2) = 4 alpha + (3 beta + gamma) . a1 + (beta + 3 gamma) . a2 + K(a1,a2).(a1,a2).
double affine_k_quadratic(const AffineData& ad, const Eigen::VectorXd& a1,
                          const Eigen::VectorXd& a2);

/// The exact negative of the t^2/2 coefficient of u along the single-switch
/// trajectory: -(H_{f,f}u + H_{g,g}u + 2 H_{f,g}u)(x) with f = f(., a1),
/// g = f(., a2). For symmetric systems this equals -K(a1,a2).(a1,a2).
double exact_decay_margin(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                          const Control& a1, const Control& a2);

/// The literal max-operand form, which differs from exact_decay_margin by the
/// diagonal curvature terms D2u f.f + D2u g.g; kept for comparison.
double pde_form_margin(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                       const Control& a1, const Control& a2);

}  // namespace stla
