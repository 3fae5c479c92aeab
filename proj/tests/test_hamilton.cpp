#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <stla/hamilton.hpp>
#include <stla/system.hpp>

#include "support/fixtures.hpp"

using namespace stla;
using stla::testing::random_affine_fixture;
using stla::testing::random_symmetric_fixture;
using stla::testing::random_unit;

namespace {
Control c1d(double a) { return ball_control(Eigen::VectorXd::Constant(1, a)); }
}  // namespace

TEST_CASE("first hamiltonian on registry points") {
  const auto ex2 = load_registry("ex2");
  CHECK(first_hamiltonian(ex2.system, ex2.target.u, Eigen::Vector2d(0, 1), c1d(1.0)) ==
        doctest::Approx(1.0));

  const auto ex1 = load_registry("ex1");
  CHECK(first_hamiltonian(ex1.system, ex1.target.u, Eigen::Vector2d(1, 0), c1d(1.0)) ==
        doctest::Approx(-1.0));
  // tangent direction gives zero
  CHECK(first_hamiltonian(ex1.system, ex1.target.u, Eigen::Vector2d(0, 1), c1d(1.0)) ==
        doctest::Approx(0.0));
}

TEST_CASE("second hamiltonian basics") {
  // linear u and constant field: every second order term vanishes
  const auto ex2 = load_registry("ex2");
  const Expr linear_u = Expr::parse("x + 2*y", ex2.system.state_vars);
  CHECK(second_hamiltonian(ex2.system, linear_u, Eigen::Vector2d(0.3, 0.4), c1d(1.0), c1d(0.5)) ==
        doctest::Approx(0.0));

  const auto ex1 = load_registry("ex1");
  CHECK(second_hamiltonian(ex1.system, ex1.target.u, Eigen::Vector2d(0, 1), c1d(1.0), c1d(1.0)) ==
        doctest::Approx(-1.0));
}

TEST_CASE("s matrices of the registry examples") {
  const auto ex4 = load_registry("ex4");
  const SMatrices s4 = s_matrix(ex4.system, ex4.target.u, Eigen::Vector3d(0, 0, 1));
  Eigen::Matrix2d expected4;
  expected4 << 1, 1, -1, 1;  // transpose of the printed form; K is unaffected
  CHECK((s4.S - expected4).norm() <= 1e-12);
  CHECK((s4.S_sym - Eigen::Matrix2d::Identity()).norm() <= 1e-12);
  CHECK(std::abs(s4.S_skew(0, 1)) == doctest::Approx(1.0));

  const auto ex5 = load_registry("ex5");
  for (double y : {1.0, 0.5, -2.0}) {
    const SMatrices s5 = s_matrix(ex5.system, ex5.target.u, Eigen::Vector3d(0, y, 0));
    Eigen::Matrix2d expected5;
    expected5 << 1, y, 0, 1;
    CHECK((s5.S - expected5).norm() <= 1e-12);
  }

  const auto ex2 = load_registry("ex2");
  const SMatrices s2 = s_matrix(ex2.system, ex2.target.u, ex2.base_point);
  CHECK(s2.S.rows() == 1);
  CHECK(s2.S(0, 0) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(s_matrix(load_registry("ex3").system, ex2.target.u, ex2.base_point),
                  KindMismatch);
}

TEST_CASE("s matrix parts recombine exactly") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto fx = random_symmetric_fixture(rng, 3, 2);
    const SMatrices s = s_matrix(fx.system, fx.u, fx.point);
    CHECK((s.S_sym + s.S_skew - s.S).norm() == 0.0);
    CHECK((s.S_sym - s.S_sym.transpose()).norm() == 0.0);
    CHECK((s.S_skew + s.S_skew.transpose()).norm() == 0.0);
  }
}

TEST_CASE("k matrix block structure and registry values") {
  const auto ex1 = load_registry("ex1");
  const KMatrix k1 = k_matrix(s_matrix(ex1.system, ex1.target.u, ex1.base_point));
  Eigen::Matrix2d expected1;
  expected1 << -1, -1, -1, -1;
  CHECK((k1.K - expected1).norm() <= 1e-12);

  const auto ex4 = load_registry("ex4");
  const KMatrix k4 = k_matrix(s_matrix(ex4.system, ex4.target.u, ex4.base_point));
  Eigen::Matrix4d expected4;
  expected4 << 1, 0, 1, -1,
               0, 1, 1, 1,
               1, 1, 1, 0,
              -1, 1, 0, 1;
  CHECK((k4.K - expected4).norm() <= 1e-12);

  const KMatrix ki = k_matrix_from(Eigen::Matrix2d::Identity());
  CHECK((ki.K - ki.K.transpose()).norm() == 0.0);
  CHECK(k_quadratic(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0)) ==
        doctest::Approx(4.0));
}

TEST_CASE("affine data on the registry") {
  const auto ex3 = load_registry("ex3");
  for (double x : {1.0, 2.0, -0.5}) {
    const AffineData ad = affine_data(ex3.system, ex3.target.u, Eigen::Vector2d(x, 0));
    CHECK(ad.alpha == doctest::Approx(0.0));
    CHECK((ad.beta[0] - ad.gamma[0]) == doctest::Approx(x));
    CHECK(ad.S(0, 0) == doctest::Approx(1.0));
  }

  const auto ex6 = load_registry("ex6");
  for (double x : {1.0, 0.4}) {
    const AffineData ad = affine_data(ex6.system, ex6.target.u, Eigen::Vector3d(x, 0.3, 0));
    const double r2 = x * x + 0.09;
    CHECK(ad.alpha == doctest::Approx(0.0));
    CHECK(ad.beta.norm() == doctest::Approx(0.0));
    CHECK(ad.gamma.norm() == doctest::Approx(0.0));
    CHECK(ad.S(0, 1) == doctest::Approx(r2));
    CHECK(ad.S(0, 0) == doctest::Approx(0.0));
    CHECK(ad.S(1, 0) == doctest::Approx(0.0));
    CHECK(ad.S(1, 1) == doctest::Approx(0.0));
  }

  CHECK_THROWS_AS(affine_data(load_registry("ex1").system, ex3.target.u, Eigen::Vector2d(1, 0)),
                  KindMismatch);
}

TEST_CASE("zero drift reduces the affine data to the symmetric matrix") {
  std::mt19937_64 rng(21);
  auto fx = random_symmetric_fixture(rng, 3, 2);
  SystemSpec affine = fx.system;
  affine.kind = SystemKind::Affine;
  for (int i = 0; i < 3; ++i) affine.sigma0.push_back(Expr::constant(0.0, fx.system.state_vars));

  const AffineData ad = affine_data(affine, fx.u, fx.point);
  const SMatrices s = s_matrix(fx.system, fx.u, fx.point);
  CHECK(ad.alpha == 0.0);
  CHECK(ad.beta.norm() == 0.0);
  CHECK(ad.gamma.norm() == 0.0);
  CHECK((ad.S - s.S).norm() <= 1e-12 * (1.0 + s.S.norm()));
}

TEST_CASE("affine k quadratic") {
  const auto ex3 = load_registry("ex3");
  const AffineData ad = affine_data(ex3.system, ex3.target.u, Eigen::Vector2d(1, 0));
  const Eigen::VectorXd minus = Eigen::VectorXd::Constant(1, -1.0);
  const Eigen::VectorXd plus = Eigen::VectorXd::Constant(1, 1.0);
  CHECK(affine_k_quadratic(ad, minus, plus) == doctest::Approx(-2.0));

  // a2 = -a1 collapses to 4 alpha + 2 (beta - gamma) . a1
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto fx = random_affine_fixture(rng, 3, 2);
    const AffineData rad = affine_data(fx.system, fx.u, fx.point);
    const Eigen::VectorXd a = random_unit(rng, 2);
    const double direct = affine_k_quadratic(rad, a, -a);
    const double closed = 4.0 * rad.alpha + 2.0 * (rad.beta - rad.gamma).dot(a);
    CHECK(direct == doctest::Approx(closed).epsilon(1e-10));
  }

  AffineData zero;
  zero.alpha = 0.0;
  zero.beta = Eigen::VectorXd::Zero(2);
  zero.gamma = Eigen::VectorXd::Zero(2);
  zero.S = Eigen::MatrixXd::Zero(2, 2);
  CHECK(affine_k_quadratic(zero, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 0.0);
}

TEST_CASE("exact decay margin on registry witnesses") {
  const auto ex1 = load_registry("ex1");
  CHECK(exact_decay_margin(ex1.system, ex1.target.u, ex1.base_point, c1d(1.0), c1d(1.0)) ==
        doctest::Approx(4.0));

  const auto ex4 = load_registry("ex4");
  const Control a1 = ball_control(Eigen::Vector2d(std::sqrt(2.0) / 2, -std::sqrt(2.0) / 2));
  const Control a2 = ball_control(Eigen::Vector2d(0, 1));
  CHECK(exact_decay_margin(ex4.system, ex4.target.u, ex4.base_point, a1, a2) ==
        doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)));

  // opposite controls cancel for symmetric systems
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fx = random_symmetric_fixture(rng, 3, 2);
    const Eigen::VectorXd a = random_unit(rng, 2);
    CHECK(std::abs(exact_decay_margin(fx.system, fx.u, fx.point, ball_control(a),
                                      ball_control(-a))) <= 1e-9);
  }
}

// ---------------------------------------------------------------------------
// identity suite over random fixtures
// ---------------------------------------------------------------------------

TEST_CASE("rewriting the second hamiltonian through S") {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 3);
    const auto fx = random_symmetric_fixture(rng, 2 + static_cast<int>(rng() % 2), m);
    const SMatrices s = s_matrix(fx.system, fx.u, fx.point);
    const Eigen::VectorXd a1 = random_unit(rng, m);
    const Eigen::VectorXd a2 = random_unit(rng, m);
    // H_{f,g} u = S a1 . a2 with f = sigma a1 outer, g = sigma a2 inner
    const double lhs =
        second_hamiltonian(fx.system, fx.u, fx.point, ball_control(a1), ball_control(a2));
    const double rhs = a2.dot(s.S * a1);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("skew part pairs with lie brackets") {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 3);
    const auto fx = random_symmetric_fixture(rng, 2 + static_cast<int>(rng() % 2), m);
    const SMatrices s = s_matrix(fx.system, fx.u, fx.point);
    const Eigen::VectorXd a1 = random_unit(rng, m);
    const Eigen::VectorXd a2 = random_unit(rng, m);
    const Eigen::VectorXd bracket =
        lie_bracket(fx.system, fx.point, ball_control(a1), ball_control(a2));
    const double lhs = bracket.dot(fx.u.jet2(fx.point).gradient);
    const double rhs = 2.0 * a2.dot(s.S_skew * a1);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("symmetric part splits into curvature and field derivative terms") {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    const int m = 1 + static_cast<int>(rng() % 3);
    const auto fx = random_symmetric_fixture(rng, n, m);
    const SMatrices s = s_matrix(fx.system, fx.u, fx.point);
    const Jet2 uj = fx.u.jet2(fx.point);

    Eigen::MatrixXd sigma(n, m);
    std::vector<Eigen::MatrixXd> jac;
    for (int j = 0; j < m; ++j) {
      Eigen::MatrixXd dj(n, n);
      for (int i = 0; i < n; ++i) {
        const Jet2 cj = fx.system.sigma[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].jet2(fx.point);
        sigma(i, j) = cj.value;
        dj.row(i) = cj.gradient.transpose();
      }
      jac.push_back(dj);
    }
    Eigen::MatrixXd expected = sigma.transpose() * uj.hessian * sigma;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        expected(i, j) += 0.5 * uj.gradient.dot(jac[static_cast<std::size_t>(j)] * sigma.col(i) +
                                                jac[static_cast<std::size_t>(i)] * sigma.col(j));
    worst = std::max(worst, (s.S_sym - expected).norm());
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("K quadratic equals the symmetric-plus-skew split") {
  std::mt19937_64 rng(104);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 4);
    const Eigen::MatrixXd S = stla::testing::random_matrix(rng, m);
    const Eigen::VectorXd a1 = random_unit(rng, m);
    const Eigen::VectorXd a2 = random_unit(rng, m);
    const Eigen::MatrixXd s_sym = 0.5 * (S + S.transpose());
    const Eigen::MatrixXd s_skew = 0.5 * (S - S.transpose());
    const double via_k = k_quadratic(S, a1, a2);
    const double split = (a1 + a2).dot(s_sym * (a1 + a2)) + 2.0 * a2.dot(s_skew * a1);
    worst = std::max(worst, std::abs(via_k - split));
    // and against the assembled block matrix
    Eigen::VectorXd v(2 * m);
    v << a1, a2;
    worst = std::max(worst, std::abs(v.dot(k_matrix_from(S).K * v) - via_k));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("gamma minus beta matches the drift brackets") {
  std::mt19937_64 rng(105);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 3);
    const auto fx = random_affine_fixture(rng, 2 + static_cast<int>(rng() % 2), m);
    const AffineData ad = affine_data(fx.system, fx.u, fx.point);
    const Eigen::VectorXd grad = fx.u.jet2(fx.point).gradient;
    // [sigma0, sigma_j] . grad u via field building blocks
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(m);
      ej[j] = 1.0;
      // f(., 0) = sigma0 and f(., ej) - sigma0 = sigma_j
      const Control zero = ball_control(Eigen::VectorXd::Zero(m));
      const Control unit = ball_control(ej);
      const Eigen::VectorXd sigma0 = field_value(fx.system, fx.point, zero);
      const Eigen::VectorXd sigmaj = field_value(fx.system, fx.point, unit) - sigma0;
      const Eigen::MatrixXd d0 = field_jacobian(fx.system, fx.point, zero);
      const Eigen::MatrixXd dj = field_jacobian(fx.system, fx.point, unit) - d0;
      const double bracket = grad.dot(dj * sigma0 - d0 * sigmaj);
      worst = std::max(worst, std::abs(ad.gamma[j] - ad.beta[j] - bracket));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("hamiltonian asymmetry equals the bracket pairing") {
  std::mt19937_64 rng(106);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const bool affine = (rng() & 1) != 0;
    const int m = 1 + static_cast<int>(rng() % 3);
    const auto fx = affine ? random_affine_fixture(rng, 3, m) : random_symmetric_fixture(rng, 3, m);
    Eigen::VectorXd v1 = 0.9 * random_unit(rng, m);
    Eigen::VectorXd v2 = 0.9 * random_unit(rng, m);
    const Control a1 = ball_control(v1);
    const Control a2 = ball_control(v2);
    const double lhs = second_hamiltonian(fx.system, fx.u, fx.point, a1, a2) -
                       second_hamiltonian(fx.system, fx.u, fx.point, a2, a1);
    const double rhs =
        fx.u.jet2(fx.point).gradient.dot(lie_bracket(fx.system, fx.point, a1, a2));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("margin equals the negative affine quadratic everywhere") {
  std::mt19937_64 rng(107);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 3);
    const auto fx = random_affine_fixture(rng, 3, m);
    const AffineData ad = affine_data(fx.system, fx.u, fx.point);
    const Eigen::VectorXd a1 = random_unit(rng, m);
    const Eigen::VectorXd a2 = random_unit(rng, m);
    const double margin =
        exact_decay_margin(fx.system, fx.u, fx.point, ball_control(a1), ball_control(a2));
    worst = std::max(worst, std::abs(margin + affine_k_quadratic(ad, a1, a2)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("literal operand form differs by the diagonal curvature terms") {
  std::mt19937_64 rng(108);
  for (int trial = 0; trial < 30; ++trial) {
    const auto fx = random_symmetric_fixture(rng, 3, 2);
    const Control a1 = ball_control(random_unit(rng, 2));
    const Control a2 = ball_control(random_unit(rng, 2));
    const double exact = exact_decay_margin(fx.system, fx.u, fx.point, a1, a2);
    const double literal = pde_form_margin(fx.system, fx.u, fx.point, a1, a2);
    const Jet2 uj = fx.u.jet2(fx.point);
    const Eigen::VectorXd f = field_value(fx.system, fx.point, a1);
    const Eigen::VectorXd g = field_value(fx.system, fx.point, a2);
    const double diagonal = f.dot(uj.hessian * f) + g.dot(uj.hessian * g);
    CHECK(exact == doctest::Approx(literal - diagonal).epsilon(1e-9));
  }
}

TEST_CASE("bilinearity of the second hamiltonian for symmetric systems") {
  std::mt19937_64 rng(109);
  const auto fx = random_symmetric_fixture(rng, 3, 2);
  const Eigen::VectorXd a = 0.5 * random_unit(rng, 2);
  const Eigen::VectorXd b = 0.4 * random_unit(rng, 2);
  const Eigen::VectorXd c = 0.6 * random_unit(rng, 2);
  const double left = second_hamiltonian(fx.system, fx.u, fx.point, ball_control(a + b), ball_control(c));
  const double split = second_hamiltonian(fx.system, fx.u, fx.point, ball_control(a), ball_control(c)) +
                       second_hamiltonian(fx.system, fx.u, fx.point, ball_control(b), ball_control(c));
  CHECK(left == doctest::Approx(split).epsilon(1e-10));
}
