#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stla/expr.hpp"

namespace stla {

enum class SystemKind { General, Symmetric, Affine };

std::string to_string(SystemKind kind);

/// An admissible control. Ball-constrained kinds carry the vector (|a| <= 1);
/// General systems reference one of the listed controls by index, with `a`
/// holding the listed value for display.
struct Control {
  Eigen::VectorXd a;
  int index = -1;
};

struct LabeledControl {
  std::string label;
  Eigen::VectorXd a;
  std::vector<Expr> field;  // n components of f(., a)
};

/// A controlled vector field in one of three forms:
///   Symmetric  x' = sigma(x) a,             |a| <= 1
///   Affine     x' = sigma0(x) + sigma(x) a, |a| <= 1
///   General    x' = f(x, a^(k)) for a finite list of labeled controls
struct SystemSpec {
  SystemKind kind = SystemKind::Symmetric;
  int n = 0;
  int m = 0;
  std::vector<std::string> state_vars;
  std::vector<Expr> sigma0;              // Affine only, n entries
  std::vector<std::vector<Expr>> sigma;  // m columns of n entries each
  std::vector<LabeledControl> controls;  // General only
};

/// Closed-form distance to the target, available for registry targets whose
/// geometry is a sphere, half-space or cylinder.
struct AnalyticDistance {
  std::function<double(const Eigen::VectorXd&)> fn;
  std::string description;
};

/// Target {x : u(x) <= level} near the base point.
struct TargetSpec {
  Expr u;
  double level = 0.0;
  std::vector<Expr> u_list;  // optional pieces of an intersection target
  std::optional<AnalyticDistance> distance;
};

struct SystemBundle {
  SystemSpec system;
  TargetSpec target;
  Eigen::VectorXd base_point;
  std::string name;
};

Control ball_control(Eigen::VectorXd a);
Control listed_control(const SystemSpec& sys, int index);

/// Throws InvalidControl unless the control is admissible for the kind.
void validate_control(const SystemSpec& sys, const Control& a);

/// f(x, a) per the kind's formula.
Eigen::VectorXd field_value(const SystemSpec& sys, const Eigen::VectorXd& x, const Control& a);

/// Spatial Jacobian Df(., a)(x), rows assembled from component gradients.
Eigen::MatrixXd field_jacobian(const SystemSpec& sys, const Eigen::VectorXd& x, const Control& a);

/// [f, g](x) = Dg f(x) - Df g(x) with f = f(., a1), g = f(., a2).
Eigen::VectorXd lie_bracket(const SystemSpec& sys, const Eigen::VectorXd& x, const Control& a1,
                            const Control& a2);

struct RegistryOptions {
  double ex3_radius = 2.0;  // ambient target radius of ex3, must be > 1
};

/// The built-in examples ex1..ex6 with their targets and base points.
SystemBundle load_registry(const std::string& name, const RegistryOptions& options = {});
std::vector<std::string> registry_names();

/// Registry metadata shown by the `examples` subcommand.
struct RegistryEntry {
  std::string name;
  std::string summary;
  std::string expected_classification;
};
RegistryEntry registry_entry(const std::string& name);

/// JSON system/target input (schema documented in the README).
SystemBundle load_system_file(const std::string& path);
SystemBundle load_system_json(const std::string& text, const std::string& origin = "<string>");

/// Serialize a bundle back to the input schema (the report.json echo).
std::string system_to_json(const SystemBundle& bundle, int indent = 2);

}  // namespace stla
