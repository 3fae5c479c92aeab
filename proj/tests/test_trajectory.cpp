#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <stla/classify.hpp>
#include <stla/trajectory.hpp>

#include "support/fixtures.hpp"

using namespace stla;

namespace {
Control c1d(double a) { return ball_control(Eigen::VectorXd::Constant(1, a)); }
}  // namespace

TEST_CASE("constant fields integrate exactly") {
  const auto ex2 = load_registry("ex2");
  const Eigen::Vector2d x0(0.3, -0.2);
  const TrajectoryRecord rec =
      integrate_switched(ex2.system, x0, c1d(1.0), c1d(1.0), 0.25, 1e-3);
  CHECK((rec.states.back() - Eigen::Vector2d(0.3, 0.3)).norm() <= 1e-14);
  CHECK(rec.times.front() == 0.0);
  CHECK(rec.times.back() == doctest::Approx(0.5));
  CHECK(rec.states[rec.switch_index][1] == doctest::Approx(0.05));
}

TEST_CASE("rotation stays on the circle") {
  const auto ex1 = load_registry("ex1");
  const TrajectoryRecord rec = integrate_switched(ex1.system, Eigen::Vector2d(0, 1), c1d(1.0),
                                                  c1d(1.0), 0.5, 1e-3, &ex1.target.u);
  for (const auto& state : rec.states) CHECK(std::abs(state.norm() - 1.0) <= 1e-10);
  // u(x_t) = cos(t) - 1 decreases on [0, pi]
  for (std::size_t i = 1; i < rec.u_values.size(); ++i)
    CHECK(rec.u_values[i] < rec.u_values[i - 1] + 1e-15);
}

TEST_CASE("rk4 is fourth order on smooth fields") {
  const auto ex5 = load_registry("ex5");
  const Control a = ball_control(Eigen::Vector2d(std::sqrt(0.5), std::sqrt(0.5)));
  const Eigen::Vector3d x0(0.1, 0.9, 0.2);

  const Eigen::VectorXd reference =
      integrate_switched(ex5.system, x0, a, a, 0.4, 1e-5).states.back();
  const double coarse =
      (integrate_switched(ex5.system, x0, a, a, 0.4, 2e-3).states.back() - reference).norm();
  const double fine =
      (integrate_switched(ex5.system, x0, a, a, 0.4, 1e-3).states.back() - reference).norm();
  CHECK(coarse / fine >= 12.0);
  CHECK(coarse / fine <= 20.0);
}

TEST_CASE("no switch equals the plain trajectory bitwise") {
  const auto ex4 = load_registry("ex4");
  const Control a = ball_control(Eigen::Vector2d(0.6, 0.8));
  const Eigen::Vector3d x0(0.1, -0.2, 0.4);
  const TrajectoryRecord switched = integrate_switched(ex4.system, x0, a, a, 0.2, 1e-3);

  Eigen::VectorXd x = x0;
  const std::size_t steps = 200;
  for (std::size_t i = 0; i < 2 * steps; ++i) x = rk4_step(ex4.system, x, a, 0.2 / steps);
  CHECK((switched.states.back() - x).norm() == 0.0);
}

TEST_CASE("symmetric reversal undoes a leg") {
  const auto ex4 = load_registry("ex4");
  const Control fwd = ball_control(Eigen::Vector2d(0.6, -0.8));
  const Control bwd = ball_control(Eigen::Vector2d(-0.6, 0.8));
  const Eigen::Vector3d x0(0.3, 0.1, 0.7);
  const Eigen::VectorXd mid = integrate_switched(ex4.system, x0, fwd, fwd, 0.2, 1e-4).states.back();
  const Eigen::VectorXd back = integrate_switched(ex4.system, mid, bwd, bwd, 0.2, 1e-4).states.back();
  CHECK((back - x0).norm() <= 1e-10);
}

TEST_CASE("divergence is reported with the last finite state") {
  // x' = 1 + x^2 blows up in finite time
  SystemSpec sys;
  sys.kind = SystemKind::Symmetric;
  sys.n = 1;
  sys.m = 1;
  sys.state_vars = {"x"};
  sys.sigma.push_back({Expr::parse("1 + x^2", sys.state_vars)});
  try {
    integrate_switched(sys, Eigen::VectorXd::Zero(1), c1d(1.0), c1d(1.0), 2.0, 1e-4);
    FAIL("expected IntegrationDiverged");
  } catch (const IntegrationDiverged& e) {
    CHECK(e.last_state().allFinite());
    CHECK(e.last_time() > 0.0);
  }
}

TEST_CASE("state expansion on linear fields") {
  const auto ex1 = load_registry("ex1");
  std::vector<double> ts, rs;
  for (int k = 4; k <= 10; ++k) {
    const double t = std::pow(2.0, -k);
    ts.push_back(t);
    rs.push_back(taylor_residual_state(ex1.system, ex1.base_point, c1d(1.0), c1d(1.0), t, t / 1000.0));
  }
  const OrderFit fit = order_fit(ts, rs);
  CHECK(fit.slope >= 2.9);
  CHECK(fit.r2 >= 0.99);
}

TEST_CASE("constant equal fields have an exact expansion") {
  const auto ex2 = load_registry("ex2");
  const double r =
      taylor_residual_state(ex2.system, Eigen::Vector2d(0.4, 0.2), c1d(0.7), c1d(0.7), 0.1, 1e-4);
  CHECK(r <= 1e-13);
}

TEST_CASE("the switch deflects by half the bracket") {
  const auto ex4 = load_registry("ex4");
  const Control e1 = ball_control(Eigen::Vector2d(1, 0));
  const Control e2 = ball_control(Eigen::Vector2d(0, 1));
  const Eigen::Vector3d x0(0.2, -0.3, 0.9);
  const double t = 0.05;

  // closed form: legs are polynomial, so the expansion with the bracket term
  // reproduces the endpoint exactly
  const TrajectoryRecord rec = integrate_switched(ex4.system, x0, e1, e2, t, t / 2000.0);
  const Eigen::Vector3d expected(x0[0] + t, x0[1] + t,
                                 x0[2] + (x0[1] - x0[0]) * t - t * t);
  CHECK((rec.states.back() - expected).norm() <= 1e-12);
  CHECK(taylor_residual_state(ex4.system, x0, e1, e2, t, t / 2000.0) <= 1e-12);
}

TEST_CASE("value expansion with equal fields matches the doubled form") {
  const auto ex5 = load_registry("ex5");
  const Control a = ball_control(Eigen::Vector2d(0.8, 0.6));
  const Eigen::Vector3d x0(0.05, 1.0, -0.1);
  for (double t : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const TrajectoryRecord rec = integrate_switched(ex5.system, x0, a, a, t, t / 1000.0);
    const double actual = ex5.target.u.value(rec.states.back()) - ex5.target.u.value(x0);
    const double h_ff = second_hamiltonian(ex5.system, ex5.target.u, x0, a, a);
    const double first = -first_hamiltonian(ex5.system, ex5.target.u, x0, a);
    const double predicted = 2.0 * (first * t + h_ff * t * t);
    CHECK(std::abs(actual - predicted) <= 30.0 * t * t * t);
  }
}

TEST_CASE("symmetric value expansion equals the K quadratic") {
  const auto ex4 = load_registry("ex4");
  const Control a1 = ball_control(Eigen::Vector2d(std::sqrt(0.5), -std::sqrt(0.5)));
  const Control a2 = ball_control(Eigen::Vector2d(0, 1));
  const SMatrices s = s_matrix(ex4.system, ex4.target.u, ex4.base_point);
  const double kq = k_quadratic(s.S, a1.a, a2.a);
  for (double t : {1.0 / 64, 1.0 / 128}) {
    const TrajectoryRecord rec = integrate_switched(ex4.system, ex4.base_point, a1, a2, t, t / 1000.0);
    const double actual = ex4.target.u.value(rec.states.back()) - 0.5;
    CHECK(std::abs(actual - 0.5 * kq * t * t) <= 10.0 * t * t * t);
  }
}

TEST_CASE("value residual order on registry fixtures") {
  for (const char* name : {"ex1", "ex5", "ex6"}) {
    const auto b = load_registry(name);
    const auto rep = classify_point(b.system, b.target.u, b.target.level, b.base_point);
    REQUIRE(rep.witness_a1.has_value());
    std::vector<double> ts, rv;
    for (int k = 4; k <= 10; ++k) {
      const double t = std::pow(2.0, -k);
      ts.push_back(t);
      rv.push_back(taylor_residual_value(b.system, b.target.u, b.base_point, *rep.witness_a1,
                                         *rep.witness_a2, t, t / 1000.0));
    }
    try {
      const OrderFit fit = order_fit(ts, rv);
      CHECK(fit.slope > 2.5);
    } catch (const DegenerateFit&) {
      // exact expansion; nothing to fit
    }
  }
}

TEST_CASE("heisenberg value residuals fit a cubic") {
  const auto ex4 = load_registry("ex4");
  const Control e1 = ball_control(Eigen::Vector2d(1, 0));
  const Control e2 = ball_control(Eigen::Vector2d(0, 1));
  const Eigen::Vector3d x0(0.2, -0.3, 0.9);
  std::vector<double> ts, rv;
  for (int k = 4; k <= 10; ++k) {
    const double t = std::pow(2.0, -k);
    ts.push_back(t);
    rv.push_back(taylor_residual_value(ex4.system, ex4.target.u, x0, e1, e2, t, t / 1000.0));
  }
  const OrderFit fit = order_fit(ts, rv);
  CHECK(fit.slope >= 2.9);
  CHECK(fit.slope <= 3.3);
}

TEST_CASE("order fit recovers exact power laws") {
  std::vector<double> ts, cubic, quadratic;
  for (int k = 2; k <= 8; ++k) {
    const double t = std::pow(2.0, -k);
    ts.push_back(t);
    cubic.push_back(t * t * t);
    quadratic.push_back(t * t);
  }
  CHECK(order_fit(ts, cubic).slope == doctest::Approx(3.0));
  CHECK(order_fit(ts, quadratic).slope == doctest::Approx(2.0));
  CHECK(order_fit(ts, cubic).r2 == doctest::Approx(1.0));
}

TEST_CASE("order fit clamps the roundoff floor") {
  std::vector<double> ts = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> rs = {1e-3, 1e-4, 1e-16, 1e-16};
  const OrderFit fit = order_fit(ts, rs);
  CHECK(fit.clamped.size() == 2);
  CHECK(fit.used == 2);

  std::vector<double> all_zero = {1e-16, 1e-16, 1e-16, 1e-16};
  CHECK_THROWS_AS(order_fit(ts, all_zero), DegenerateFit);
  CHECK_THROWS_AS(order_fit({0.1, 0.2}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(order_fit({0.1, -0.2, 0.3, 0.4}, {1.0, 2.0, 3.0, 4.0}), std::invalid_argument);
}

TEST_CASE("csv export shape") {
  const auto ex1 = load_registry("ex1");
  const TrajectoryRecord rec = integrate_switched(ex1.system, Eigen::Vector2d(0, 1), c1d(1.0),
                                                  c1d(-1.0), 0.01, 1e-3, &ex1.target.u);
  std::ostringstream out;
  write_trajectory_csv(out, ex1.system, rec);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "time,x,y,u,control_label");
  std::string first;
  std::getline(in, first);
  CHECK(first.substr(0, 2) == "0,");
  std::size_t lines = 1;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == rec.states.size());
  CHECK(line.find("a2") != std::string::npos);
}
