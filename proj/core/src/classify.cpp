#include "stla/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "stla/parallel.hpp"

namespace stla {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::DegenerateGradient: return "DEGENERATE_GRADIENT";
    case Classification::FirstOrderPetrov: return "FIRST_ORDER_PETROV";
    case Classification::SecondOrder: return "SECOND_ORDER";
    case Classification::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

std::string to_string(AffineCase c) {
  switch (c) {
    case AffineCase::None: return "NONE";
    case AffineCase::SingleField: return "SINGLE_FIELD";
    case AffineCase::BracketDrift: return "BRACKET_DRIFT";
    case AffineCase::SstarNeg: return "SSTAR_NEG";
    case AffineCase::SNonsym: return "S_NONSYM";
    case AffineCase::AlphaRelaxed: return "ALPHA_RELAXED";
  }
  return "?";
}

std::vector<Eigen::VectorXd> direction_grid(int dim, int count) {
  std::vector<Eigen::VectorXd> out;
  if (dim == 1) {
    out.push_back(Eigen::VectorXd::Constant(1, 1.0));
    out.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return out;
  }
  if (dim == 2) {
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / count;
      Eigen::VectorXd d(2);
      d << std::cos(angle), std::sin(angle);
      out.push_back(d);
    }
    return out;
  }
  if (dim == 3) {
    // Fibonacci sphere
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * k;
      Eigen::VectorXd d(3);
      d << r * std::cos(phi), r * std::sin(phi), z;
      out.push_back(d);
    }
    return out;
  }
  // Normalized tensor grid on {-1,-1/2,0,1/2,1}^dim minus the origin.
  const std::array<double, 5> levels = {-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  for (;;) {
    Eigen::VectorXd d(dim);
    for (int i = 0; i < dim; ++i) d[i] = levels[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    if (d.norm() > 1e-12) out.push_back(d / d.norm());
    int i = 0;
    while (i < dim) {
      if (++idx[static_cast<std::size_t>(i)] < static_cast<int>(levels.size())) break;
      idx[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == dim) break;
  }
  return out;
}

namespace {

Eigen::VectorXd sigma_column_value(const SystemSpec& sys, int j, const Eigen::VectorXd& x) {
  Eigen::VectorXd v(sys.n);
  for (int i = 0; i < sys.n; ++i)
    v[i] = sys.sigma[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].value(x);
  return v;
}

Eigen::VectorXd sigma0_value(const SystemSpec& sys, const Eigen::VectorXd& x) {
  Eigen::VectorXd v(sys.n);
  for (int i = 0; i < sys.n; ++i) v[i] = sys.sigma0[static_cast<std::size_t>(i)].value(x);
  return v;
}

// sigma(x)^T grad
Eigen::VectorXd sigma_transpose_grad(const SystemSpec& sys, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& grad) {
  Eigen::VectorXd w(sys.m);
  for (int j = 0; j < sys.m; ++j) w[j] = sigma_column_value(sys, j, x).dot(grad);
  return w;
}

double max_field_norm(const SystemSpec& sys, const Eigen::VectorXd& x) {
  double mf = 0.0;
  switch (sys.kind) {
    case SystemKind::General:
      for (int k = 0; k < static_cast<int>(sys.controls.size()); ++k)
        mf = std::max(mf, field_value(sys, x, listed_control(sys, k)).norm());
      break;
    case SystemKind::Affine:
      mf = sigma0_value(sys, x).norm();
      [[fallthrough]];
    case SystemKind::Symmetric:
      for (int j = 0; j < sys.m; ++j) mf += sigma_column_value(sys, j, x).norm();
      break;
  }
  return mf;
}

// Canonical eigenvector sign: the entry of largest magnitude is positive.
void canonicalize_sign(Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (v[best] < 0.0) v = -v;
}

struct PairCandidate {
  Eigen::VectorXd a1, a2;
  double margin = 0.0;
  AffineCase tag = AffineCase::None;
};

// Witness-pair candidates for the second order inequality at x, best first
// within each construction. Used by classify_point and neighborhood_scan.
std::vector<PairCandidate> affine_candidates(const AffineData& ad, double tol_margin) {
  std::vector<PairCandidate> out;
  const int m = static_cast<int>(ad.beta.size());

  // single tangent field on the unit direction grid
  {
    PairCandidate best;
    bool have = false;
    for (const auto& d : direction_grid(m, 256)) {
      const double margin = -affine_k_quadratic(ad, d, d);
      if (!have || margin > best.margin) {
        best = {d, d, margin, AffineCase::SingleField};
        have = true;
      }
    }
    if (have && best.margin > tol_margin) out.push_back(best);
  }

  // drift bracket: a1 along gamma - beta, a2 = -a1
  const Eigen::VectorXd diff = ad.gamma - ad.beta;
  if (diff.norm() > tol_margin) {
    const Eigen::VectorXd a1 = diff / diff.norm();
    const double margin = -affine_k_quadratic(ad, a1, -a1);
    if (margin > tol_margin) out.push_back({a1, -a1, margin, AffineCase::BracketDrift});
  }

  // negative eigenvalue of S*
  const Eigen::MatrixXd s_sym = 0.5 * (ad.S + ad.S.transpose());
  const EigenResult eig = eig_symmetric(s_sym);
  if (eig.eigenvalues[0] < -tol_margin) {
    Eigen::VectorXd a1 = eig.eigenvectors.col(0);
    if ((ad.beta + ad.gamma).dot(a1) > 0.0) a1 = -a1;
    const double margin = -affine_k_quadratic(ad, a1, a1);
    if (margin > tol_margin) out.push_back({a1, a1, margin, AffineCase::SstarNeg});
  }

  // nonsymmetric S
  const Eigen::MatrixXd skew = 0.5 * (ad.S - ad.S.transpose());
  if (skew.norm() > 1e-10 * std::max(1.0, ad.S.norm())) {
    try {
      const NonsymWitness w = nonsym_witness(ad.S);
      // the linear term decides the overall sign of the pair
      const double plus = -affine_k_quadratic(ad, w.a1, w.a2);
      const double minus = -affine_k_quadratic(ad, -w.a1, -w.a2);
      PairCandidate cand;
      cand.tag = AffineCase::SNonsym;
      if (plus >= minus) {
        cand.a1 = w.a1;
        cand.a2 = w.a2;
        cand.margin = plus;
      } else {
        cand.a1 = -w.a1;
        cand.a2 = -w.a2;
        cand.margin = minus;
      }
      if (cand.margin > tol_margin) out.push_back(cand);
    } catch (const SymmetricInput&) {
      // borderline skew norm; nothing to add
    }
  }
  return out;
}

}  // namespace

std::pair<double, Control> petrov_margin(const SystemSpec& sys, const Expr& u,
                                         const Eigen::VectorXd& x) {
  const Jet2 uj = u.jet2(x);
  const Eigen::VectorXd& grad = uj.gradient;

  switch (sys.kind) {
    case SystemKind::Symmetric: {
      const Eigen::VectorXd w = sigma_transpose_grad(sys, x, grad);
      const double margin = w.norm();
      Eigen::VectorXd best = Eigen::VectorXd::Zero(sys.m);
      if (margin > 0.0) best = -w / margin;
      return {margin, ball_control(best)};
    }
    case SystemKind::Affine: {
      const Eigen::VectorXd w = sigma_transpose_grad(sys, x, grad);
      const double margin = -grad.dot(sigma0_value(sys, x)) + w.norm();
      Eigen::VectorXd best = Eigen::VectorXd::Zero(sys.m);
      if (w.norm() > 0.0) best = -w / w.norm();
      return {margin, ball_control(best)};
    }
    case SystemKind::General: {
      double best_margin = -std::numeric_limits<double>::infinity();
      int best_index = 0;
      for (int k = 0; k < static_cast<int>(sys.controls.size()); ++k) {
        const double value = -grad.dot(field_value(sys, x, listed_control(sys, k)));
        if (value > best_margin) {
          best_margin = value;
          best_index = k;
        }
      }
      return {best_margin, listed_control(sys, best_index)};
    }
  }
  throw std::logic_error("unreachable");
}

AnalysisReport classify_point(const SystemSpec& sys, const Expr& u, double level,
                              const Eigen::VectorXd& x, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  AnalysisReport rep;
  rep.point = x;
  rep.level = level;
  rep.tol = tol;

  const Jet2 uj = u.jet2(x);
  rep.gradient = uj.gradient;
  const double gnorm = rep.gradient.norm();
  if (gnorm <= tol) {
    rep.classification = Classification::DegenerateGradient;
    return rep;
  }

  const double mf = max_field_norm(sys, x);
  const double petrov_scale = 1.0 + gnorm * (1.0 + mf);

  auto [pm, pa] = petrov_margin(sys, u, x);
  rep.petrov_margin = pm;
  rep.petrov_control = pa;
  if (pm > tol * petrov_scale) {
    rep.classification = Classification::FirstOrderPetrov;
    return rep;
  }

  // tangency residuals, one per field building block
  auto residual_of = [&](const Eigen::VectorXd& field) {
    rep.tangency_residuals.push_back(std::abs(rep.gradient.dot(field)));
    return rep.tangency_residuals.back() <= tol * (1.0 + gnorm * (1.0 + field.norm()));
  };
  rep.tangent = true;
  switch (sys.kind) {
    case SystemKind::Affine:
      rep.tangent = residual_of(sigma0_value(sys, x)) && rep.tangent;
      [[fallthrough]];
    case SystemKind::Symmetric:
      for (int j = 0; j < sys.m; ++j) rep.tangent = residual_of(sigma_column_value(sys, j, x)) && rep.tangent;
      break;
    case SystemKind::General:
      for (int k = 0; k < static_cast<int>(sys.controls.size()); ++k)
        rep.tangent = residual_of(field_value(sys, x, listed_control(sys, k))) && rep.tangent;
      break;
  }

  if (sys.kind == SystemKind::Symmetric) {
    rep.smat = s_matrix(sys, u, x);
    rep.kmat = k_matrix(*rep.smat);
    rep.eigen = eig_symmetric(rep.kmat->K);
    const double kscale = 1.0 + rep.kmat->K.norm();
    const double lambda_min = rep.eigen->eigenvalues[0];
    if (lambda_min < -tol * kscale) {
      Eigen::VectorXd v = rep.eigen->eigenvectors.col(0);
      canonicalize_sign(v);
      v *= std::numbers::sqrt2;
      Eigen::VectorXd a1 = v.head(sys.m);
      Eigen::VectorXd a2 = v.tail(sys.m);
      // eigenvectors of nonzero eigenvalues split into equal-norm halves
      if (a1.norm() > 1e-12) a1 /= a1.norm();
      if (a2.norm() > 1e-12) a2 /= a2.norm();
      rep.witness_a1 = ball_control(a1);
      rep.witness_a2 = ball_control(a2);
      rep.second_order_margin = -2.0 * lambda_min;
      rep.classification = Classification::SecondOrder;
      return rep;
    }
    rep.classification = Classification::Inconclusive;
    return rep;
  }

  if (sys.kind == SystemKind::Affine) {
    rep.affine = affine_data(sys, u, x);
    const double sscale = 1.0 + rep.affine->Stilde.norm();
    const double tol_margin = tol * sscale;

    if (rep.tangent) {
      const auto candidates = affine_candidates(*rep.affine, tol_margin);
      if (!candidates.empty()) {
        const PairCandidate& c = candidates.front();
        rep.witness_a1 = ball_control(c.a1);
        rep.witness_a2 = ball_control(c.a2);
        rep.second_order_margin = c.margin;
        if (rep.affine->alpha > tol_margin) {
          rep.case_tag = AffineCase::AlphaRelaxed;
          rep.relaxed_case = c.tag;
        } else {
          rep.case_tag = c.tag;
        }
        rep.classification = Classification::SecondOrder;
        return rep;
      }
      rep.classification = Classification::Inconclusive;
      return rep;
    }

    // Tangency failed without a Petrov direction: look for pairs whose summed
    // field is tangent and still decays at second order.
    const Eigen::VectorXd w = sigma_transpose_grad(sys, x, rep.gradient);
    const double drift_term = 2.0 * rep.gradient.dot(sigma0_value(sys, x));
    const auto grid = direction_grid(sys.m, 64);
    bool found = false;
    PairCandidate best;
    for (const auto& d1 : grid) {
      for (const auto& d2 : grid) {
        if (std::abs(drift_term + w.dot(d1 + d2)) > tol * petrov_scale) continue;
        const double margin = -affine_k_quadratic(*rep.affine, d1, d2);
        if (margin > tol_margin && (!found || margin > best.margin)) {
          best = {d1, d2, margin, AffineCase::None};
          found = true;
        }
      }
    }
    if (found) {
      rep.witness_a1 = ball_control(best.a1);
      rep.witness_a2 = ball_control(best.a2);
      rep.second_order_margin = best.margin;
      rep.classification = Classification::SecondOrder;
      return rep;
    }
    rep.classification = Classification::Inconclusive;
    return rep;
  }

  // General: brute force over ordered listed pairs whose summed field is
  // tangent at x (the weakened pairing rule), maximizing the exact margin.
  const int count = static_cast<int>(sys.controls.size());
  const double margin_scale =
      1.0 + uj.hessian.norm() * mf * mf + gnorm * (1.0 + mf) * (1.0 + mf);
  bool found = false;
  double best_margin = 0.0;
  int best_k = -1, best_l = -1;
  for (int k = 0; k < count; ++k) {
    for (int l = 0; l < count; ++l) {
      const Control ck = listed_control(sys, k);
      const Control cl = listed_control(sys, l);
      const Eigen::VectorXd sum = field_value(sys, x, ck) + field_value(sys, x, cl);
      if (std::abs(rep.gradient.dot(sum)) > tol * (1.0 + gnorm * (1.0 + sum.norm()))) continue;
      const double margin = exact_decay_margin(sys, u, x, ck, cl);
      if (margin > tol * margin_scale && (!found || margin > best_margin)) {
        best_margin = margin;
        best_k = k;
        best_l = l;
        found = true;
      }
    }
  }
  if (found) {
    rep.witness_a1 = listed_control(sys, best_k);
    rep.witness_a2 = listed_control(sys, best_l);
    rep.second_order_margin = best_margin;
    rep.classification = Classification::SecondOrder;
    return rep;
  }
  rep.classification = Classification::Inconclusive;
  return rep;
}

NecessaryReport check_necessary(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                                double tol) {
  NecessaryReport rep;
  const Jet2 uj = u.jet2(x);
  const double gnorm = uj.gradient.norm();
  const double mf = max_field_norm(sys, x);
  const double scale = 1.0 + gnorm * (1.0 + mf) * (1.0 + mf);

  // candidate controls
  std::vector<Control> controls;
  if (sys.kind == SystemKind::General) {
    rep.hypotheses_unchecked = true;  // convexity of f(x, .) is not verified
    for (int k = 0; k < static_cast<int>(sys.controls.size()); ++k)
      controls.push_back(listed_control(sys, k));
  } else {
    for (const auto& d : direction_grid(sys.m, 64)) controls.push_back(ball_control(d));
  }

  // tangency hypotheses
  for (const auto& c : controls) {
    const Eigen::VectorXd f = field_value(sys, x, c);
    if (std::abs(uj.gradient.dot(f)) > tol * (1.0 + gnorm * (1.0 + f.norm()))) {
      rep.precondition_ok = false;
      break;
    }
  }

  // (i) transversal bracket over ordered pairs
  for (std::size_t i = 0; i < controls.size(); ++i) {
    for (std::size_t j = 0; j < controls.size(); ++j) {
      if (i == j) continue;
      const double value = uj.gradient.dot(lie_bracket(sys, x, controls[i], controls[j]));
      if (value < rep.bracket_value) {
        rep.bracket_value = value;
        rep.bracket_a1 = controls[i];
        rep.bracket_a2 = controls[j];
      }
    }
  }
  rep.bracket_transversal = rep.bracket_value < -tol * scale;

  // (ii) a single field with negative self-Hamiltonian
  for (const auto& c : controls) {
    const double value = second_hamiltonian(sys, u, x, c, c);
    if (value < rep.single_value) {
      rep.single_value = value;
      rep.single_control = c;
    }
  }
  rep.single_field_negative = rep.single_value < -tol * scale;

  return rep;
}

ScanReport neighborhood_scan(const SystemSpec& sys, const Expr& u, double level,
                             const Eigen::VectorXd& xbar, double radius, int grid_per_axis,
                             double rho, double tol) {
  if (!(radius > 0.0)) throw std::invalid_argument("scan radius must be positive");
  if (grid_per_axis < 2) throw std::invalid_argument("scan grid needs at least 2 points per axis");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");

  ScanReport rep;
  rep.xbar = xbar;
  rep.radius = radius;
  rep.grid_per_axis = grid_per_axis;
  rep.rho = rho;
  rep.center = classify_point(sys, u, level, xbar, tol);

  Control center_a1, center_a2;
  if (rep.center.witness_a1 && rep.center.witness_a2) {
    center_a1 = *rep.center.witness_a1;
    center_a2 = *rep.center.witness_a2;
  } else if (rep.center.petrov_control) {
    center_a1 = center_a2 = *rep.center.petrov_control;
  } else {
    throw std::invalid_argument("no witness controls available at the scan center");
  }

  const int n = sys.n;
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(grid_per_axis);
  rep.points.resize(total);

  parallel_for(total, [&](std::size_t flat) {
    std::size_t rem = flat;
    Eigen::VectorXd x = xbar;
    for (int i = 0; i < n; ++i) {
      const auto step = static_cast<int>(rem % static_cast<std::size_t>(grid_per_axis));
      rem /= static_cast<std::size_t>(grid_per_axis);
      x[i] = xbar[i] - radius + 2.0 * radius * step / (grid_per_axis - 1);
    }
    ScanPoint& pt = rep.points[flat];
    pt.x = x;
    pt.margin_center_pair = exact_decay_margin(sys, u, x, center_a1, center_a2);
    pt.margin_best = pt.margin_center_pair;

    // this point's own best witness, when one exists
    if (sys.kind == SystemKind::Symmetric) {
      const SMatrices s = s_matrix(sys, u, x);
      const EigenResult eig = eig_symmetric(k_matrix(s).K);
      pt.margin_best = std::max(pt.margin_best, -2.0 * eig.eigenvalues[0]);
    } else if (sys.kind == SystemKind::Affine) {
      const AffineData ad = affine_data(sys, u, x);
      for (const auto& cand : affine_candidates(ad, tol * (1.0 + ad.Stilde.norm())))
        pt.margin_best = std::max(pt.margin_best, cand.margin);
    } else {
      const int count = static_cast<int>(sys.controls.size());
      for (int k = 0; k < count; ++k)
        for (int l = 0; l < count; ++l)
          pt.margin_best = std::max(pt.margin_best, exact_decay_margin(sys, u, x, listed_control(sys, k),
                                                                       listed_control(sys, l)));
    }

    const Eigen::VectorXd sum =
        field_value(sys, x, center_a1) + field_value(sys, x, center_a2);
    const Jet2 uj = u.jet2(x);
    pt.first_order_center_pair = uj.gradient.dot(sum);
    pt.pass = pt.margin_best >= rho;
  });

  rep.min_margin_best = std::numeric_limits<double>::infinity();
  rep.min_margin_center = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    const ScanPoint& pt = rep.points[i];
    rep.min_margin_best = std::min(rep.min_margin_best, pt.margin_best);
    rep.min_margin_center = std::min(rep.min_margin_center, pt.margin_center_pair);
    if (!pt.pass) rep.violations.push_back(i);
    if (pt.first_order_center_pair > tol * (1.0 + rep.center.gradient.norm())) rep.outward_points.push_back(i);
  }
  rep.all_pass = rep.violations.empty();
  rep.supersolution_holds = rep.min_margin_center >= rho;
  return rep;
}

IntersectionReport classify_intersection(const SystemSpec& sys, const std::vector<Expr>& targets,
                                         const Eigen::VectorXd& x, double tol) {
  if (targets.empty()) throw std::invalid_argument("at least one target function is required");

  IntersectionReport rep;

  // candidate pairs: each target's own witness first, then grid pairs
  std::vector<std::pair<Control, Control>> candidates;
  for (const auto& u : targets) {
    const AnalysisReport r = classify_point(sys, u, 0.0, x, tol);
    if (r.witness_a1 && r.witness_a2) candidates.emplace_back(*r.witness_a1, *r.witness_a2);
    else if (r.petrov_control) candidates.emplace_back(*r.petrov_control, *r.petrov_control);
  }
  if (sys.kind == SystemKind::General) {
    const int count = static_cast<int>(sys.controls.size());
    for (int k = 0; k < count; ++k)
      for (int l = 0; l < count; ++l)
        candidates.emplace_back(listed_control(sys, k), listed_control(sys, l));
  } else {
    for (const auto& d : direction_grid(sys.m, 16)) {
      candidates.emplace_back(ball_control(d), ball_control(d));
      candidates.emplace_back(ball_control(d), ball_control(Eigen::VectorXd(-d)));
    }
  }

  // jets of every target at x
  std::vector<Jet2> jets;
  jets.reserve(targets.size());
  for (const auto& u : targets) jets.push_back(u.jet2(x));

  std::mt19937_64 rng(0x57a1a5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> nearby;
  for (int k = 0; k < 8; ++k) {
    Eigen::VectorXd y(sys.n);
    for (int i = 0; i < sys.n; ++i) y[i] = normal(rng);
    nearby.push_back(x + 1e-3 * y / std::max(1.0, y.norm()));
  }

  auto first_order_surrogate = [&](const Control& a1, const Control& a2, std::size_t i,
                                   double& value) {
    const Eigen::VectorXd sum = field_value(sys, x, a1) + field_value(sys, x, a2);
    if (sum.norm() <= tol) return false;

    Control abar;
    double lambda = 0.0;
    if (sys.kind == SystemKind::Symmetric) {
      Eigen::VectorXd mid = a1.a + a2.a;
      if (mid.norm() <= tol) return false;
      lambda = mid.norm();
      abar = ball_control(mid / lambda);
    } else if (sys.kind == SystemKind::Affine) {
      abar = ball_control(0.5 * (a1.a + a2.a));
      lambda = 2.0;
    } else {
      bool found = false;
      for (int k = 0; k < static_cast<int>(sys.controls.size()) && !found; ++k) {
        const Eigen::VectorXd f = field_value(sys, x, listed_control(sys, k));
        if (f.norm() <= tol) continue;
        const double cosine = f.dot(sum) / (f.norm() * sum.norm());
        if (cosine > 1.0 - 1e-9) {
          abar = listed_control(sys, k);
          lambda = sum.norm() / f.norm();
          found = true;
        }
      }
      if (!found) return false;
    }

    // the proportionality must persist near x, not only at x
    for (const auto& y : nearby) {
      const Eigen::VectorXd lhs = lambda * field_value(sys, y, abar);
      const Eigen::VectorXd rhs = field_value(sys, y, a1) + field_value(sys, y, a2);
      if ((lhs - rhs).norm() > 1e-6 * (1.0 + rhs.norm())) return false;
    }

    value = -field_value(sys, x, abar).dot(jets[i].gradient);
    return value > tol * (1.0 + jets[i].gradient.norm() * (1.0 + sum.norm()));
  };

  for (const auto& [a1, a2] : candidates) {
    std::vector<int> cases;
    std::vector<double> values;
    bool ok = true;
    for (std::size_t i = 0; i < targets.size() && ok; ++i) {
      double value = 0.0;
      if (first_order_surrogate(a1, a2, i, value)) {
        cases.push_back(1);
        values.push_back(value);
        continue;
      }
      const Eigen::VectorXd sum = field_value(sys, x, a1) + field_value(sys, x, a2);
      const double tangency = std::abs(jets[i].gradient.dot(sum));
      if (tangency <= tol * (1.0 + jets[i].gradient.norm() * (1.0 + sum.norm()))) {
        const double margin = exact_decay_margin(sys, targets[i], x, a1, a2);
        if (margin > tol * (1.0 + jets[i].hessian.norm() + jets[i].gradient.norm())) {
          cases.push_back(2);
          values.push_back(margin);
          continue;
        }
      }
      ok = false;
    }
    if (ok) {
      rep.found = true;
      rep.a1 = a1;
      rep.a2 = a2;
      rep.case_per_target = std::move(cases);
      rep.value_per_target = std::move(values);
      return rep;
    }
  }
  return rep;
}

}  // namespace stla
