#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "stla/expr.hpp"
#include "stla/system.hpp"

namespace stla {

/// Fixed-step RK4 record of the single-switch trajectory: control a1 on
/// [0, t), a2 on [t, 2t]. The switch lands exactly on a grid node.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::size_t switch_index = 0;
  std::vector<double> u_values;  // filled when a target function is supplied
  Control a1, a2;
};

/// Integrates the switched system with classical RK4. The step is rounded
/// down so each leg takes an integer number of steps. Passing `u` records
/// target values along the trajectory.
TrajectoryRecord integrate_switched(const SystemSpec& sys, const Eigen::VectorXd& x0,
                                    const Control& a1, const Control& a2, double t, double h,
                                    const Expr* u = nullptr);

/// One RK4 step of x' = f(x, a) from state x.
Eigen::VectorXd rk4_step(const SystemSpec& sys, const Eigen::VectorXd& x, const Control& a,
                         double h);

/// |x_{2t} - x0 - predicted| for the second order state expansion
/// (f+g) t + [D(f+g)(f+g) + [f,g]] t^2 / 2 evaluated at x0.
double taylor_residual_state(const SystemSpec& sys, const Eigen::VectorXd& x0, const Control& a1,
                             const Control& a2, double t, double h);

/// |u(x_{2t}) - u(x0) - grad u.(f+g) t - (H_{f+g,f+g} u + grad u.[f,g]) t^2/2|.
double taylor_residual_value(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x0,
                             const Control& a1, const Control& a2, double t, double h);

/// Least squares fit of log(residual) against log(t). Residuals below the
/// 1e-13 roundoff floor are excluded and recorded in `clamped`.
struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t used = 0;
  std::vector<std::size_t> clamped;
};

OrderFit order_fit(const std::vector<double>& ts, const std::vector<double>& residuals);

/// CSV columns: time, x1..xn, u, control_label (17 significant digits).
void write_trajectory_csv(std::ostream& out, const SystemSpec& sys, const TrajectoryRecord& record);

}  // namespace stla
