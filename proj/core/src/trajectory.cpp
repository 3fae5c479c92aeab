#include "stla/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "stla/hamilton.hpp"

namespace stla {

namespace {

constexpr double kBlowupBound = 1e8;

void check_finite(const Eigen::VectorXd& x, const Eigen::VectorXd& last, double time) {
  if (!x.allFinite() || x.norm() > kBlowupBound)
    throw IntegrationDiverged("trajectory diverged", last, time);
}

std::size_t steps_for(double span, double h) {
  if (!(span > 0.0) || !(h > 0.0)) throw std::invalid_argument("durations and steps must be positive");
  return static_cast<std::size_t>(std::ceil(span / h - 1e-12));
}

}  // namespace

Eigen::VectorXd rk4_step(const SystemSpec& sys, const Eigen::VectorXd& x, const Control& a,
                         double h) {
  const Eigen::VectorXd k1 = field_value(sys, x, a);
  const Eigen::VectorXd k2 = field_value(sys, x + 0.5 * h * k1, a);
  const Eigen::VectorXd k3 = field_value(sys, x + 0.5 * h * k2, a);
  const Eigen::VectorXd k4 = field_value(sys, x + h * k3, a);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

TrajectoryRecord integrate_switched(const SystemSpec& sys, const Eigen::VectorXd& x0,
                                    const Control& a1, const Control& a2, double t, double h,
                                    const Expr* u) {
  validate_control(sys, a1);
  validate_control(sys, a2);
  const std::size_t steps = steps_for(t, h);

  TrajectoryRecord record;
  record.a1 = a1;
  record.a2 = a2;
  record.times.reserve(2 * steps + 1);
  record.states.reserve(2 * steps + 1);

  Eigen::VectorXd x = x0;
  record.times.push_back(0.0);
  record.states.push_back(x);

  const double leg_h = t / static_cast<double>(steps);
  for (int leg = 0; leg < 2; ++leg) {
    const Control& a = leg == 0 ? a1 : a2;
    const double offset = leg == 0 ? 0.0 : t;
    for (std::size_t i = 1; i <= steps; ++i) {
      Eigen::VectorXd next = rk4_step(sys, x, a, leg_h);
      check_finite(next, x, record.times.back());
      x = std::move(next);
      record.times.push_back(offset + t * static_cast<double>(i) / static_cast<double>(steps));
      record.states.push_back(x);
    }
    if (leg == 0) record.switch_index = record.states.size() - 1;
  }

  if (u != nullptr) {
    record.u_values.reserve(record.states.size());
    for (const auto& state : record.states) record.u_values.push_back(u->value(state));
  }
  return record;
}

namespace {

Eigen::VectorXd predicted_state_change(const SystemSpec& sys, const Eigen::VectorXd& x0,
                                       const Control& a1, const Control& a2, double t) {
  const Eigen::VectorXd f = field_value(sys, x0, a1);
  const Eigen::VectorXd g = field_value(sys, x0, a2);
  const Eigen::MatrixXd df = field_jacobian(sys, x0, a1);
  const Eigen::MatrixXd dg = field_jacobian(sys, x0, a2);
  const Eigen::VectorXd sum = f + g;
  const Eigen::VectorXd second = (df + dg) * sum + (dg * f - df * g);
  return sum * t + 0.5 * t * t * second;
}

}  // namespace

double taylor_residual_state(const SystemSpec& sys, const Eigen::VectorXd& x0, const Control& a1,
                             const Control& a2, double t, double h) {
  const TrajectoryRecord record = integrate_switched(sys, x0, a1, a2, t, h);
  const Eigen::VectorXd actual = record.states.back() - x0;
  return (actual - predicted_state_change(sys, x0, a1, a2, t)).norm();
}

double taylor_residual_value(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x0,
                             const Control& a1, const Control& a2, double t, double h) {
  const TrajectoryRecord record = integrate_switched(sys, x0, a1, a2, t, h);

  const Jet2 uj = u.jet2(x0);
  const Eigen::VectorXd f = field_value(sys, x0, a1);
  const Eigen::VectorXd g = field_value(sys, x0, a2);
  const Eigen::MatrixXd df = field_jacobian(sys, x0, a1);
  const Eigen::MatrixXd dg = field_jacobian(sys, x0, a2);
  const Eigen::VectorXd sum = f + g;

  const double first = uj.gradient.dot(sum) * t;
  const double h_sum = sum.dot(uj.hessian * sum) + uj.gradient.dot((df + dg) * sum);
  const double bracket = uj.gradient.dot(dg * f - df * g);
  const double second = 0.5 * t * t * (h_sum + bracket);

  const double actual = u.value(record.states.back()) - u.value(x0);
  return std::abs(actual - first - second);
}

OrderFit order_fit(const std::vector<double>& ts, const std::vector<double>& residuals) {
  if (ts.size() != residuals.size()) throw std::invalid_argument("mismatched fit inputs");
  if (ts.size() < 4) throw std::invalid_argument("order fit needs at least 4 points");

  constexpr double kFloor = 1e-13;
  OrderFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0)) throw std::invalid_argument("order fit needs positive times");
    if (residuals[i] < kFloor) {
      fit.clamped.push_back(i);
      continue;
    }
    lx.push_back(std::log(ts[i]));
    ly.push_back(std::log(residuals[i]));
  }
  fit.used = lx.size();
  if (fit.used < 2)
    throw DegenerateFit("all residuals at the roundoff floor; expansion is exact to machine precision",
                        fit.clamped.size());

  const double n = static_cast<double>(lx.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) throw DegenerateFit("degenerate abscissae", fit.clamped.size());
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;

  double ss_res = 0.0;
  const double mean_y = sy / n;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double predicted = fit.slope * lx[i] + fit.intercept;
    ss_res += (ly[i] - predicted) * (ly[i] - predicted);
    ss_tot += (ly[i] - mean_y) * (ly[i] - mean_y);
  }
  fit.r2 = ss_tot < 1e-30 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

void write_trajectory_csv(std::ostream& out, const SystemSpec& sys,
                          const TrajectoryRecord& record) {
  out << "time";
  for (const auto& name : sys.state_vars) out << "," << name;
  out << ",u,control_label\n";

  char buf[32];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };

  auto label = [&](std::size_t i) -> std::string {
    const Control& c = i < record.switch_index ? record.a1 : record.a2;
    if (sys.kind == SystemKind::General && c.index >= 0)
      return sys.controls[static_cast<std::size_t>(c.index)].label;
    return i < record.switch_index ? "a1" : "a2";
  };

  for (std::size_t i = 0; i < record.states.size(); ++i) {
    emit(record.times[i]);
    for (Eigen::Index k = 0; k < record.states[i].size(); ++k) {
      out << ",";
      emit(record.states[i][k]);
    }
    out << ",";
    if (i < record.u_values.size()) emit(record.u_values[i]);
    out << "," << label(i) << "\n";
  }
}

}  // namespace stla
