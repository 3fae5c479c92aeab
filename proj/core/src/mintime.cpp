#include "stla/mintime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "stla/parallel.hpp"
#include "stla/trajectory.hpp"

namespace stla {

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw std::invalid_argument("bad log grid");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (count - 1));
  return out;
}

std::vector<double> default_switch_times(double horizon, int count) {
  return log_spaced(1e-4, horizon / 2.0, count);
}

std::vector<ControlPair> candidate_pairs(const SystemSpec& sys, const AnalysisReport& report,
                                         int n_random, std::uint64_t seed) {
  std::vector<ControlPair> pairs;

  if (sys.kind == SystemKind::General) {
    const int count = static_cast<int>(sys.controls.size());
    for (int k = 0; k < count; ++k)
      for (int l = 0; l < count; ++l)
        pairs.push_back({listed_control(sys, k), listed_control(sys, l)});
    return pairs;
  }

  if (report.witness_a1 && report.witness_a2) {
    pairs.push_back({*report.witness_a1, *report.witness_a2});
    pairs.push_back({ball_control(-report.witness_a1->a), ball_control(-report.witness_a2->a)});
  } else if (report.petrov_control) {
    pairs.push_back({*report.petrov_control, *report.petrov_control});
    pairs.push_back(
        {ball_control(-report.petrov_control->a), ball_control(-report.petrov_control->a)});
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&]() {
    Eigen::VectorXd v(sys.m);
    do {
      for (int i = 0; i < sys.m; ++i) v[i] = normal(rng);
    } while (v.norm() < 1e-12);
    return Eigen::VectorXd(v / v.norm());
  };
  for (int k = 0; k < n_random; ++k) {
    ControlPair p{ball_control(random_unit()), ball_control(random_unit())};
    pairs.push_back(p);
  }
  return pairs;
}

namespace {

// Bisection inside one RK4 step: the crossing lies in (0, h] ahead of `from`.
double refine_crossing(const SystemSpec& sys, const Expr& u, double level,
                       const Eigen::VectorXd& from, const Control& a, double h, double scale) {
  double lo = 0.0, hi = h;
  double mid = h;
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double phi = u.value(rk4_step(sys, from, a, mid)) - level;
    if (std::abs(phi) <= 1e-12 * scale) return mid;
    if (phi > 0.0) lo = mid;
    else hi = mid;
  }
  return mid;
}

}  // namespace

std::optional<double> hitting_time(const SystemSpec& sys, const Expr& u, double level,
                                   const Eigen::VectorXd& x0, const Control& a1, const Control& a2,
                                   double switch_time, double horizon, double h) {
  if (!(switch_time > 0.0) || switch_time > 0.5 * horizon + 1e-12)
    throw std::invalid_argument("switch_time must lie in (0, horizon/2]");
  const double scale = std::max(1.0, std::abs(level));

  if (u.value(x0) - level <= 0.0) return 0.0;

  Eigen::VectorXd x = x0;
  double time = 0.0;
  for (int leg = 0; leg < 2; ++leg) {
    const Control& a = leg == 0 ? a1 : a2;
    const double span = leg == 0 ? switch_time : horizon - switch_time;
    if (!(span > 0.0)) continue;
    const auto steps = static_cast<std::size_t>(std::ceil(span / h - 1e-12));
    const double leg_h = span / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      Eigen::VectorXd next = rk4_step(sys, x, a, leg_h);
      if (!next.allFinite() || next.norm() > 1e8)
        throw IntegrationDiverged("trajectory diverged", x, time);
      const double phi = u.value(next) - level;
      if (phi <= 0.0) {
        return time + refine_crossing(sys, u, level, x, a, leg_h, scale);
      }
      x = std::move(next);
      time += leg_h;
    }
  }
  return std::nullopt;
}

OracleResult oracle_min_time(const SystemSpec& sys, const Expr& u, double level,
                             const Eigen::VectorXd& x0, const SweepPlan& plan) {
  OracleResult best;
  if (u.value(x0) - level <= 0.0) {
    best.time = 0.0;
    if (!plan.candidates.empty()) best.pair = plan.candidates.front();
    return best;
  }
  for (const auto& pair : plan.candidates) {
    for (const double ts : plan.switch_times) {
      const auto t = hitting_time(sys, u, level, x0, pair.a1, pair.a2, ts, plan.horizon, plan.step);
      if (t && (!best.time || *t < *best.time)) {
        best.time = t;
        best.pair = pair;
        best.switch_time = ts;
      }
    }
  }
  return best;
}

namespace {

PowerFit power_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  PowerFit fit;
  const double denom = n * sxx - sx * sx;
  fit.exponent = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.exponent * sx) / n;
  fit.constant = std::exp(intercept);

  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    const double predicted = fit.exponent * lx + intercept;
    ss_res += (ly - predicted) * (ly - predicted);
    ss_tot += (ly - mean_y) * (ly - mean_y);
  }
  fit.r2 = ss_tot < 1e-30 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

}  // namespace

MinTimeEstimate exponent_sweep(const SystemSpec& sys, const TargetSpec& target,
                               const Eigen::VectorXd& xbar, const SweepPlan& plan) {
  const double scale = std::max(1.0, std::abs(target.level));
  if (std::abs(target.u.value(xbar) - target.level) > 1e-9 * scale)
    throw std::invalid_argument("sweep base point must lie on the target boundary");
  if (plan.directions.empty() || plan.deltas.empty())
    throw std::invalid_argument("sweep plan needs directions and deltas");
  for (std::size_t i = 1; i < plan.deltas.size(); ++i) {
    if (!(plan.deltas[i] < plan.deltas[i - 1]))
      throw std::invalid_argument("sweep deltas must be decreasing");
  }

  MinTimeEstimate est;
  est.records.resize(plan.directions.size() * plan.deltas.size());

  parallel_for(est.records.size(), [&](std::size_t flat) {
    const std::size_t d = flat / plan.deltas.size();
    const std::size_t k = flat % plan.deltas.size();
    SweepRecord& rec = est.records[flat];
    rec.direction = static_cast<int>(d);
    rec.delta = plan.deltas[k];
    const Eigen::VectorXd x0 = xbar + rec.delta * plan.directions[d];
    const OracleResult r = oracle_min_time(sys, target.u, target.level, x0, plan);
    rec.time = r.time;
    rec.pair = r.pair;
    rec.switch_time = r.switch_time;
    if (target.distance) rec.distance = target.distance->fn(x0);
  });

  std::vector<double> deltas, times, distances, dtimes;
  std::size_t unreached = 0;
  for (const auto& rec : est.records) {
    if (!rec.time) {
      ++unreached;
      continue;
    }
    if (*rec.time <= 0.0) continue;  // already on the target; excluded from fits
    deltas.push_back(rec.delta);
    times.push_back(*rec.time);
    if (rec.distance > 0.0) {
      distances.push_back(rec.distance);
      dtimes.push_back(*rec.time);
    }
  }
  est.unreached_fraction =
      est.records.empty() ? 0.0 : static_cast<double>(unreached) / static_cast<double>(est.records.size());

  if (deltas.size() >= 2) {
    est.fit = power_fit(deltas, times);
    est.fit_ok = true;

    est.envelope_max = 0.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const double envelope = times[i] / std::sqrt(deltas[i]);
      est.envelope_max = std::max(est.envelope_max, envelope);
      const double lx = std::log(deltas[i]);
      sx += lx;
      sy += envelope;
      sxx += lx * lx;
      sxy += lx * envelope;
    }
    const double n = static_cast<double>(deltas.size());
    const double denom = n * sxx - sx * sx;
    est.envelope_slope = std::abs(denom) < 1e-30 ? 0.0 : (n * sxy - sx * sy) / denom;
  }
  if (distances.size() >= 2) est.distance_fit = power_fit(distances, dtimes);
  return est;
}

void write_sweep_csv(std::ostream& out, const SystemSpec& sys, const MinTimeEstimate& est) {
  out << "direction_id,delta,T_star";
  for (int i = 1; i <= sys.m; ++i) out << ",a1_" << i;
  for (int i = 1; i <= sys.m; ++i) out << ",a2_" << i;
  out << ",switch_time,reached\n";

  char buf[32];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };

  for (const auto& rec : est.records) {
    out << rec.direction << ",";
    emit(rec.delta);
    out << ",";
    if (rec.time) emit(*rec.time);
    else out << "nan";
    auto emit_control = [&](const Control& c) {
      for (int i = 0; i < sys.m; ++i) {
        out << ",";
        if (c.a.size() == sys.m) emit(c.a[i]);
        else out << "0";
      }
    };
    emit_control(rec.pair.a1);
    emit_control(rec.pair.a2);
    out << ",";
    emit(rec.switch_time);
    out << "," << (rec.time ? 1 : 0) << "\n";
  }
}

}  // namespace stla
