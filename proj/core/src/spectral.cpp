#include "stla/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace stla {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

}  // namespace

EigenResult eig_symmetric(const Eigen::MatrixXd& input) {
  if (input.rows() != input.cols()) throw NonSquare("eig_symmetric requires a square matrix");
  const Eigen::Index n = input.rows();

  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double norm = std::max(a.norm(), 1e-300);

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(a) > 1e-14 * norm; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // rows/columns p and q of A = J^T A J and of the accumulated V
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  EigenResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.eigenvectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }

  const Eigen::MatrixXd sym = 0.5 * (input + input.transpose());
  out.residual = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r =
        (sym * out.eigenvectors.col(k) - out.eigenvalues[k] * out.eigenvectors.col(k))
            .cwiseAbs()
            .maxCoeff();
    out.residual = std::max(out.residual, r);
  }
  return out;
}

std::pair<bool, double> is_psd(const Eigen::MatrixXd& a, double tol) {
  const EigenResult eig = eig_symmetric(a);
  const double lambda_min = eig.eigenvalues[0];
  if (tol < 0.0) tol = 1e-10 * std::max(1.0, a.norm());
  return {lambda_min >= -tol, lambda_min};
}

NonsymWitness nonsym_witness(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols()) throw NonSquare("nonsym_witness requires a square matrix");
  const double norm = std::max(s.norm(), 1e-300);
  const Eigen::MatrixXd skew = 0.5 * (s - s.transpose());
  if (skew.norm() <= 1e-10 * norm)
    throw SymmetricInput("nonsym_witness requires a nonsymmetric matrix");

  const EigenResult ss = eig_symmetric(s.transpose() * s);
  const Eigen::Index m = s.rows();

  // Walk the eigenvectors of S^T S from the largest eigenvalue down. A
  // candidate fails only when S a1 = lambda a1 = S^T a1; if that held for
  // every eigenvector with positive eigenvalue, S would be symmetric.
  NonsymWitness best;
  bool have_best = false;
  for (Eigen::Index k = m - 1; k >= 0; --k) {
    const double lambda_sq = ss.eigenvalues[k];
    if (lambda_sq <= 1e-20 * norm * norm) break;
    for (int sign = 0; sign < 2; ++sign) {
      Eigen::VectorXd a1 = ss.eigenvectors.col(k);
      if (sign == 1) a1 = -a1;
      const Eigen::VectorXd sa1 = s * a1;
      const double lambda = sa1.norm();
      if (lambda <= 0.0) continue;
      Eigen::VectorXd a2 = -sa1 / lambda;
      const double value = -2.0 * lambda * (1.0 + a1.dot(a2));
      if (!have_best || value < best.value) {
        best = {a1, a2, value, lambda};
        have_best = true;
      }
      if (value < -1e-12) return best;
    }
  }
  if (!have_best) throw SymmetricInput("nonsym_witness found no usable eigenvector");
  return best;
}

}  // namespace stla
