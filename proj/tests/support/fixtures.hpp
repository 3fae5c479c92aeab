#pragma once

#include <random>
#include <string>
#include <vector>

#include <stla/expr.hpp>
#include <stla/system.hpp>

// Seeded random expression and system fixtures for the identity suites.
namespace stla::testing {

inline std::vector<std::string> var_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

/// Random polynomial of total degree <= degree with small integer-like
/// coefficients; smooth everywhere, safe for finite differences.
inline Expr random_polynomial(std::mt19937_64& rng, const std::vector<std::string>& vars,
                              int degree, int terms = 4) {
  const int n = static_cast<int>(vars.size());
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_int_distribution<int> deg(0, degree);

  Expr sum = Expr::constant(coef(rng), vars);
  for (int t = 0; t < terms; ++t) {
    int c = coef(rng);
    if (c == 0) c = 1;
    Expr term = Expr::constant(c, vars);
    int remaining = deg(rng);
    while (remaining > 0) {
      const int v = pick(rng);
      const int p = std::min(remaining, deg(rng) == 0 ? 1 : 2);
      term = Expr::mul(term, Expr::pow_int(Expr::variable(v, vars), p));
      remaining -= p;
    }
    sum = Expr::add(sum, term);
  }
  return sum;
}

/// Random trigonometric-polynomial mix, still entire (no poles or branch cuts).
inline Expr random_smooth(std::mt19937_64& rng, const std::vector<std::string>& vars, int degree) {
  Expr base = random_polynomial(rng, vars, degree);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(vars.size()) - 1);
  std::uniform_int_distribution<int> which(0, 3);
  switch (which(rng)) {
    case 0:
      return Expr::add(base, Expr::call("sin", Expr::variable(pick(rng), vars)));
    case 1:
      return Expr::add(base, Expr::call("cos", Expr::variable(pick(rng), vars)));
    default:
      return base;
  }
}

inline Eigen::VectorXd random_point(std::mt19937_64& rng, int n, double radius = 1.0) {
  std::uniform_real_distribution<double> dist(-radius, radius);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = dist(rng);
  return x;
}

inline Eigen::VectorXd random_unit(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(m);
  do {
    for (int i = 0; i < m; ++i) v[i] = normal(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

struct RandomFixture {
  SystemSpec system;
  Expr u;
  Eigen::VectorXd point;
};

inline RandomFixture random_symmetric_fixture(std::mt19937_64& rng, int n, int m) {
  RandomFixture fx;
  const auto vars = var_names(n);
  fx.system.kind = SystemKind::Symmetric;
  fx.system.n = n;
  fx.system.m = m;
  fx.system.state_vars = vars;
  for (int j = 0; j < m; ++j) {
    std::vector<Expr> col;
    for (int i = 0; i < n; ++i) col.push_back(random_smooth(rng, vars, 2));
    fx.system.sigma.push_back(std::move(col));
  }
  fx.u = random_polynomial(rng, vars, 3);
  fx.point = random_point(rng, n);
  return fx;
}

inline RandomFixture random_affine_fixture(std::mt19937_64& rng, int n, int m) {
  RandomFixture fx = random_symmetric_fixture(rng, n, m);
  fx.system.kind = SystemKind::Affine;
  for (int i = 0; i < n; ++i)
    fx.system.sigma0.push_back(random_smooth(rng, fx.system.state_vars, 2));
  return fx;
}

/// Samples a ball-constrained system at fixed controls, producing a general
/// system with the same dynamics at those controls.
inline SystemSpec sample_general(const SystemSpec& sys, const std::vector<Eigen::VectorXd>& points) {
  SystemSpec out;
  out.kind = SystemKind::General;
  out.n = sys.n;
  out.m = sys.m;
  out.state_vars = sys.state_vars;
  int counter = 0;
  for (const auto& a : points) {
    LabeledControl lc;
    lc.label = "a" + std::to_string(++counter);
    lc.a = a;
    for (int i = 0; i < sys.n; ++i) {
      Expr fi = sys.kind == SystemKind::Affine ? sys.sigma0[static_cast<std::size_t>(i)]
                                               : Expr::constant(0.0, sys.state_vars);
      for (int j = 0; j < sys.m; ++j) {
        fi = Expr::add(fi, Expr::mul(Expr::constant(a[j], sys.state_vars),
                                     sys.sigma[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]));
      }
      lc.field.push_back(fi);
    }
    out.controls.push_back(std::move(lc));
  }
  return out;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = dist(rng);
  return a;
}

}  // namespace stla::testing
