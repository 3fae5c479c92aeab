#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "stla/expr.hpp"
#include "stla/hamilton.hpp"
#include "stla/spectral.hpp"
#include "stla/system.hpp"

namespace stla {

enum class Classification {
  DegenerateGradient,
  FirstOrderPetrov,
  SecondOrder,
  Inconclusive,
};

/// Which affine argument produced the witness. AlphaRelaxed marks a case that
/// had to absorb a positive alpha.
enum class AffineCase {
  None,
  SingleField,
  BracketDrift,
  SstarNeg,
  SNonsym,
  AlphaRelaxed,
};

std::string to_string(Classification c);
std::string to_string(AffineCase c);

struct AnalysisReport {
  Eigen::VectorXd point;
  double level = 0.0;
  double tol = 1e-9;
  Eigen::VectorXd gradient;

  std::vector<double> tangency_residuals;  // per sigma column (sigma0 first for affine)
  bool tangent = false;

  Classification classification = Classification::Inconclusive;

  double petrov_margin = 0.0;
  std::optional<Control> petrov_control;

  double second_order_margin = 0.0;
  std::optional<Control> witness_a1;
  std::optional<Control> witness_a2;
  AffineCase case_tag = AffineCase::None;
  AffineCase relaxed_case = AffineCase::None;  // set when case_tag == AlphaRelaxed

  std::optional<SMatrices> smat;
  std::optional<KMatrix> kmat;
  std::optional<AffineData> affine;
  std::optional<EigenResult> eigen;  // of K for symmetric systems

  bool second_order() const { return classification == Classification::SecondOrder; }
};

/// max_a {-f(x,a) . grad u(x)} over the admissible controls, with the
/// maximizing control. Positive margin means some field points inward.
std::pair<double, Control> petrov_margin(const SystemSpec& sys, const Expr& u,
                                         const Eigen::VectorXd& x);

AnalysisReport classify_point(const SystemSpec& sys, const Expr& u, double level,
                              const Eigen::VectorXd& x, double tol = 1e-9);

/// Necessary conditions at a tangency point: a bracket transversal to the
/// boundary, or a single field with negative self-Hamiltonian.
struct NecessaryReport {
  bool bracket_transversal = false;
  std::optional<Control> bracket_a1, bracket_a2;
  double bracket_value = 0.0;  // most negative [f1,f2] . grad u found

  bool single_field_negative = false;
  std::optional<Control> single_control;
  double single_value = 0.0;  // most negative H_{f,f} u found

  bool precondition_ok = true;       // tangency hypotheses held at x
  bool hypotheses_unchecked = false;  // general kind: convexity of f(x,.) not verified

  bool holds() const { return bracket_transversal || single_field_negative; }
};

NecessaryReport check_necessary(const SystemSpec& sys, const Expr& u, const Eigen::VectorXd& x,
                                double tol = 1e-9);

struct ScanPoint {
  Eigen::VectorXd x;
  double margin_best = 0.0;        // max over candidate pairs of the exact margin
  double margin_center_pair = 0.0;  // exact margin for the x-bar witness pair
  double first_order_center_pair = 0.0;  // grad u . (f + g) for the x-bar pair
  bool pass = false;                      // margin_best >= rho
};

struct ScanReport {
  Eigen::VectorXd xbar;
  double radius = 0.0;
  int grid_per_axis = 0;
  double rho = 0.0;
  AnalysisReport center;
  std::vector<ScanPoint> points;
  double min_margin_best = 0.0;
  double min_margin_center = 0.0;
  std::vector<std::size_t> violations;      // indices with margin_best < rho
  std::vector<std::size_t> outward_points;  // first-order term > 0 for the center pair
  bool all_pass = false;
  bool supersolution_holds = false;  // margin_center_pair >= rho on the whole grid
};

/// Margins of the second order inequality over an axis-aligned box.
ScanReport neighborhood_scan(const SystemSpec& sys, const Expr& u, double level,
                             const Eigen::VectorXd& xbar, double radius, int grid_per_axis,
                             double rho, double tol = 1e-9);

/// Intersection targets: one control pair has to serve every u_i, either
/// through the first order surrogate or through tangency plus a positive
/// second order margin.
struct IntersectionReport {
  bool found = false;
  std::optional<Control> a1, a2;
  std::vector<int> case_per_target;  // 1 = first order, 2 = second order
  std::vector<double> value_per_target;
};

IntersectionReport classify_intersection(const SystemSpec& sys, const std::vector<Expr>& targets,
                                         const Eigen::VectorXd& x, double tol = 1e-9);

/// Deterministic set of (approximately) `count` unit directions: +-1 in one
/// dimension, a uniform circle in two, a Fibonacci sphere in three, and a
/// normalized tensor grid above that.
std::vector<Eigen::VectorXd> direction_grid(int dim, int count);

}  // namespace stla
