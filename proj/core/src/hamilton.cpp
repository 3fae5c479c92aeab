#include "stla/hamilton.hpp"

#include <cmath>

namespace stla {

double first_hamiltonian(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                         const Control& a) {
  const Jet2 uj = u.jet2(x);
  return -uj.gradient.dot(field_value(sys, x, a));
}

double second_hamiltonian(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                          const Control& outer, const Control& inner) {
  const Jet2 uj = u.jet2(x);
  const Eigen::VectorXd g = field_value(sys, x, outer);
  const Eigen::VectorXd f = field_value(sys, x, inner);
  const Eigen::MatrixXd df = field_jacobian(sys, x, inner);
  return g.dot(uj.hessian * f) + uj.gradient.dot(df * g);
}

namespace {

// Columns of the (possibly extended) matrix sigma evaluated at x, together
// with grad(grad(u) . sigma_i) = D2u sigma_i + Dsigma_i^T grad(u).
struct ColumnData {
  std::vector<Eigen::VectorXd> value;
  std::vector<Eigen::VectorXd> grad_w;
};

ColumnData column_data(const std::vector<const std::vector<Expr>*>& columns, const Jet2& uj,
                       const Eigen::VectorXd& x) {
  ColumnData out;
  const Eigen::Index n = x.size();
  out.value.reserve(columns.size());
  out.grad_w.reserve(columns.size());
  for (const auto* col : columns) {
    Eigen::VectorXd v(n);
    Eigen::MatrixXd jac(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Jet2 cj = (*col)[static_cast<std::size_t>(i)].jet2(x);
      v[i] = cj.value;
      jac.row(i) = cj.gradient.transpose();
    }
    out.value.push_back(v);
    out.grad_w.push_back(uj.hessian * v + jac.transpose() * uj.gradient);
  }
  return out;
}

Eigen::MatrixXd s_from_columns(const ColumnData& cols) {
  const int k = static_cast<int>(cols.value.size());
  Eigen::MatrixXd S(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      S(i, j) = cols.grad_w[static_cast<std::size_t>(i)].dot(cols.value[static_cast<std::size_t>(j)]);
  return S;
}

}  // namespace

SMatrices s_matrix(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x) {
  if (sys.kind != SystemKind::Symmetric)
    throw KindMismatch("s_matrix requires a symmetric system");
  const Jet2 uj = u.jet2(x);
  std::vector<const std::vector<Expr>*> columns;
  for (const auto& col : sys.sigma) columns.push_back(&col);
  SMatrices out;
  out.S = s_from_columns(column_data(columns, uj, x));
  out.S_sym = 0.5 * (out.S + out.S.transpose());
  out.S_skew = 0.5 * (out.S - out.S.transpose());
  out.at_point = x;
  return out;
}

KMatrix k_matrix(const SMatrices& s) { return k_matrix_from(s.S); }

KMatrix k_matrix_from(const Eigen::MatrixXd& S) {
  const Eigen::Index m = S.rows();
  if (S.cols() != m) throw NonSquare("S must be square");
  const Eigen::MatrixXd s_sym = 0.5 * (S + S.transpose());
  KMatrix out;
  out.K.resize(2 * m, 2 * m);
  out.K.topLeftCorner(m, m) = s_sym;
  out.K.topRightCorner(m, m) = S.transpose();
  out.K.bottomLeftCorner(m, m) = S;
  out.K.bottomRightCorner(m, m) = s_sym;
  return out;
}

double k_quadratic(const Eigen::MatrixXd& S, const Eigen::VectorXd& a1, const Eigen::VectorXd& a2) {
  return a1.dot(S * a1) + a2.dot(S * a2) + 2.0 * a2.dot(S * a1);
}

AffineData affine_data(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x) {
  if (sys.kind != SystemKind::Affine) throw KindMismatch("affine_data requires an affine system");
  const Jet2 uj = u.jet2(x);
  std::vector<const std::vector<Expr>*> columns;
  columns.push_back(&sys.sigma0);
  for (const auto& col : sys.sigma) columns.push_back(&col);
  const ColumnData cols = column_data(columns, uj, x);

  AffineData out;
  out.Stilde = s_from_columns(cols);
  const int m = sys.m;
  out.alpha = out.Stilde(0, 0);
  out.beta = out.Stilde.block(0, 1, 1, m).transpose();
  out.gamma = out.Stilde.block(1, 0, m, 1);
  out.S = out.Stilde.block(1, 1, m, m);

  // gamma - beta must be the bracket pairing ([sigma0, sigma_j] . grad u)_j;
  // both sides come from exact jets, so any gap is an internal fault.
  double scale = 1.0 + out.Stilde.norm();
  for (int j = 0; j < m; ++j) {
    // bracket of sigma0 with column j, assembled from the cached jacobians
    Eigen::VectorXd sigma0_v = cols.value[0];
    Eigen::VectorXd colj_v = cols.value[static_cast<std::size_t>(j + 1)];
    // grad_w already folds in D2u; recompute plain jacobians instead.
    Eigen::MatrixXd j0(sys.n, sys.n), jj(sys.n, sys.n);
    for (int i = 0; i < sys.n; ++i) {
      j0.row(i) = sys.sigma0[static_cast<std::size_t>(i)].jet2(x).gradient.transpose();
      jj.row(i) =
          sys.sigma[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].jet2(x).gradient.transpose();
    }
    const double bracket = uj.gradient.dot(jj * sigma0_v - j0 * colj_v);
    if (std::abs(out.gamma[j] - out.beta[j] - bracket) > 1e-9 * scale)
      throw std::logic_error("affine_data: gamma - beta is inconsistent with the drift brackets");
  }
  return out;
}

double affine_k_quadratic(const AffineData& ad, const Eigen::VectorXd& a1,
                          const Eigen::VectorXd& a2) {
  return 4.0 * ad.alpha + (3.0 * ad.beta + ad.gamma).dot(a1) + (ad.beta + 3.0 * ad.gamma).dot(a2) +
         k_quadratic(ad.S, a1, a2);
}

namespace {

struct MarginParts {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  Eigen::VectorXd f, g;
  Eigen::MatrixXd df, dg;
};

MarginParts margin_parts(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                         const Control& a1, const Control& a2) {
  MarginParts p;
  Jet2 uj = u.jet2(x);
  p.grad = std::move(uj.gradient);
  p.hess = std::move(uj.hessian);
  p.f = field_value(sys, x, a1);
  p.g = field_value(sys, x, a2);
  p.df = field_jacobian(sys, x, a1);
  p.dg = field_jacobian(sys, x, a2);
  return p;
}

}  // namespace

double exact_decay_margin(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                          const Control& a1, const Control& a2) {
  const MarginParts p = margin_parts(sys, u, x, a1, a2);
  const double h_ff = p.f.dot(p.hess * p.f) + p.grad.dot(p.df * p.f);
  const double h_gg = p.g.dot(p.hess * p.g) + p.grad.dot(p.dg * p.g);
  const double h_fg = p.f.dot(p.hess * p.g) + p.grad.dot(p.dg * p.f);  // outer f, inner g
  return -(h_ff + h_gg + 2.0 * h_fg);
}

double pde_form_margin(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                       const Control& a1, const Control& a2) {
  const MarginParts p = margin_parts(sys, u, x, a1, a2);
  const Eigen::VectorXd sum = p.f + p.g;
  const Eigen::MatrixXd dsum = p.df + p.dg;
  const Eigen::VectorXd bracket = p.dg * p.f - p.df * p.g;
  return -p.f.dot(p.hess * p.g) - p.grad.dot(dsum * sum + bracket);
}

}  // namespace stla
