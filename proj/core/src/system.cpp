#include "stla/system.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stla {

using json = nlohmann::ordered_json;

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::General: return "general";
    case SystemKind::Symmetric: return "symmetric";
    case SystemKind::Affine: return "affine";
  }
  return "?";
}

Control ball_control(Eigen::VectorXd a) {
  Control c;
  c.a = std::move(a);
  return c;
}

Control listed_control(const SystemSpec& sys, int index) {
  if (sys.kind != SystemKind::General) throw KindMismatch("listed controls exist only for general systems");
  if (index < 0 || index >= static_cast<int>(sys.controls.size()))
    throw InvalidControl("control index " + std::to_string(index) + " out of range");
  Control c;
  c.a = sys.controls[static_cast<std::size_t>(index)].a;
  c.index = index;
  return c;
}

void validate_control(const SystemSpec& sys, const Control& a) {
  if (sys.kind == SystemKind::General) {
    if (a.index < 0 || a.index >= static_cast<int>(sys.controls.size()))
      throw InvalidControl("general systems require a listed control index");
    return;
  }
  if (a.a.size() != sys.m)
    throw InvalidControl("control dimension " + std::to_string(a.a.size()) + " != m = " +
                         std::to_string(sys.m));
  if (a.a.norm() > 1.0 + 1e-12)
    throw InvalidControl("control norm " + std::to_string(a.a.norm()) + " exceeds 1");
}

Eigen::VectorXd field_value(const SystemSpec& sys, const Eigen::VectorXd& x, const Control& a) {
  validate_control(sys, a);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(sys.n);
  switch (sys.kind) {
    case SystemKind::General: {
      const auto& entry = sys.controls[static_cast<std::size_t>(a.index)];
      for (int i = 0; i < sys.n; ++i) f[i] = entry.field[static_cast<std::size_t>(i)].value(x);
      break;
    }
    case SystemKind::Affine:
      for (int i = 0; i < sys.n; ++i) f[i] = sys.sigma0[static_cast<std::size_t>(i)].value(x);
      [[fallthrough]];
    case SystemKind::Symmetric:
      for (int j = 0; j < sys.m; ++j) {
        const double aj = a.a[j];
        if (aj == 0.0) continue;
        const auto& col = sys.sigma[static_cast<std::size_t>(j)];
        for (int i = 0; i < sys.n; ++i) f[i] += aj * col[static_cast<std::size_t>(i)].value(x);
      }
      break;
  }
  return f;
}

Eigen::MatrixXd field_jacobian(const SystemSpec& sys, const Eigen::VectorXd& x, const Control& a) {
  validate_control(sys, a);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(sys.n, sys.n);
  switch (sys.kind) {
    case SystemKind::General: {
      const auto& entry = sys.controls[static_cast<std::size_t>(a.index)];
      for (int i = 0; i < sys.n; ++i)
        jac.row(i) = entry.field[static_cast<std::size_t>(i)].jet2(x).gradient.transpose();
      break;
    }
    case SystemKind::Affine:
      for (int i = 0; i < sys.n; ++i)
        jac.row(i) = sys.sigma0[static_cast<std::size_t>(i)].jet2(x).gradient.transpose();
      [[fallthrough]];
    case SystemKind::Symmetric:
      for (int j = 0; j < sys.m; ++j) {
        const double aj = a.a[j];
        if (aj == 0.0) continue;
        const auto& col = sys.sigma[static_cast<std::size_t>(j)];
        for (int i = 0; i < sys.n; ++i)
          jac.row(i) += aj * col[static_cast<std::size_t>(i)].jet2(x).gradient.transpose();
      }
      break;
  }
  return jac;
}

Eigen::VectorXd lie_bracket(const SystemSpec& sys, const Eigen::VectorXd& x, const Control& a1,
                            const Control& a2) {
  const Eigen::VectorXd f = field_value(sys, x, a1);
  const Eigen::VectorXd g = field_value(sys, x, a2);
  const Eigen::MatrixXd df = field_jacobian(sys, x, a1);
  const Eigen::MatrixXd dg = field_jacobian(sys, x, a2);
  return dg * f - df * g;
}

namespace {

std::vector<Expr> parse_column(const std::vector<std::string>& texts,
                               const std::vector<std::string>& vars) {
  std::vector<Expr> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Expr::parse(t, vars));
  return out;
}

AnalyticDistance sphere_exterior_distance(Eigen::VectorXd center, double radius) {
  // target = complement of the open ball, d(x) = max(0, radius - |x - c|)
  AnalyticDistance d;
  d.description = "max(0, " + std::to_string(radius) + " - |x - c|)";
  d.fn = [center = std::move(center), radius](const Eigen::VectorXd& x) {
    return std::max(0.0, radius - (x - center).norm());
  };
  return d;
}

AnalyticDistance ball_distance(Eigen::VectorXd center, double radius) {
  AnalyticDistance d;
  d.description = "max(0, |x - c| - " + std::to_string(radius) + ")";
  d.fn = [center = std::move(center), radius](const Eigen::VectorXd& x) {
    return std::max(0.0, (x - center).norm() - radius);
  };
  return d;
}

AnalyticDistance halfspace_distance(Eigen::VectorXd normal, double offset) {
  // target = {x : normal . x <= offset} with |normal| = 1
  AnalyticDistance d;
  d.description = "max(0, n.x - c)";
  d.fn = [normal = std::move(normal), offset](const Eigen::VectorXd& x) {
    return std::max(0.0, normal.dot(x) - offset);
  };
  return d;
}

AnalyticDistance cylinder_distance(double radius) {
  // target = {x : x1^2 + x2^2 <= radius^2}
  AnalyticDistance d;
  d.description = "max(0, hypot(x, y) - " + std::to_string(radius) + ")";
  d.fn = [radius](const Eigen::VectorXd& x) {
    return std::max(0.0, std::hypot(x[0], x[1]) - radius);
  };
  return d;
}

}  // namespace

std::vector<std::string> registry_names() { return {"ex1", "ex2", "ex3", "ex4", "ex5", "ex6"}; }

RegistryEntry registry_entry(const std::string& name) {
  if (name == "ex1") return {"ex1", "planar rotation field, half-plane target", "SECOND_ORDER"};
  if (name == "ex2") return {"ex2", "constant vertical field, exterior of the unit disc", "SECOND_ORDER"};
  if (name == "ex3") return {"ex3", "shear drift with vertical control, disc target", "SECOND_ORDER"};
  if (name == "ex4") return {"ex4", "Heisenberg system, ball target", "SECOND_ORDER"};
  if (name == "ex5") return {"ex5", "convexified Reeds-Shepp system, ball target", "SECOND_ORDER"};
  if (name == "ex6") return {"ex6", "rotating drift with scaled radial field, cylinder target", "SECOND_ORDER"};
  throw UnknownExample(name);
}

SystemBundle load_registry(const std::string& name, const RegistryOptions& options) {
  SystemBundle b;
  b.name = name;

  if (name == "ex1") {
    std::vector<std::string> vars = {"x", "y"};
    b.system.kind = SystemKind::Symmetric;
    b.system.n = 2;
    b.system.m = 1;
    b.system.state_vars = vars;
    b.system.sigma = {parse_column({"-y", "x"}, vars)};
    b.target.u = Expr::parse("y - 1", vars);
    b.target.level = 0.0;
    b.target.distance = halfspace_distance(Eigen::Vector2d(0, 1), 1.0);
    b.base_point = Eigen::Vector2d(0, 1);
    return b;
  }

  if (name == "ex2") {
    std::vector<std::string> vars = {"x", "y"};
    b.system.kind = SystemKind::Symmetric;
    b.system.n = 2;
    b.system.m = 1;
    b.system.state_vars = vars;
    b.system.sigma = {parse_column({"0", "1"}, vars)};
    b.target.u = Expr::parse("(1 - x^2 - y^2)/2", vars);
    b.target.level = 0.0;
    b.target.distance = sphere_exterior_distance(Eigen::Vector2d(0, 0), 1.0);
    b.base_point = Eigen::Vector2d(1, 0);
    return b;
  }

  if (name == "ex3") {
    if (!(options.ex3_radius > 1.0)) throw std::invalid_argument("ex3 radius must exceed 1");
    std::vector<std::string> vars = {"x", "y"};
    b.system.kind = SystemKind::Affine;
    b.system.n = 2;
    b.system.m = 1;
    b.system.state_vars = vars;
    b.system.sigma0 = parse_column({"y", "0"}, vars);
    b.system.sigma = {parse_column({"0", "1"}, vars)};
    b.target.u = Expr::parse("(x^2 + y^2)/2", vars);
    b.target.level = 0.5 * options.ex3_radius * options.ex3_radius;
    b.target.distance = ball_distance(Eigen::Vector2d(0, 0), options.ex3_radius);
    b.base_point = Eigen::Vector2d(options.ex3_radius, 0);
    return b;
  }

  if (name == "ex4") {
    std::vector<std::string> vars = {"x", "y", "z"};
    b.system.kind = SystemKind::Symmetric;
    b.system.n = 3;
    b.system.m = 2;
    b.system.state_vars = vars;
    b.system.sigma = {parse_column({"1", "0", "y"}, vars), parse_column({"0", "1", "-x"}, vars)};
    b.target.u = Expr::parse("(x^2 + y^2 + z^2)/2", vars);
    b.target.level = 0.5;
    b.target.distance = ball_distance(Eigen::Vector3d(0, 0, 0), 1.0);
    b.base_point = Eigen::Vector3d(0, 0, 1);
    return b;
  }

  if (name == "ex5") {
    std::vector<std::string> vars = {"x", "y", "z"};
    b.system.kind = SystemKind::Symmetric;
    b.system.n = 3;
    b.system.m = 2;
    b.system.state_vars = vars;
    b.system.sigma = {parse_column({"cos(z)", "sin(z)", "0"}, vars),
                      parse_column({"0", "0", "1"}, vars)};
    b.target.u = Expr::parse("(x^2 + y^2 + z^2)/2", vars);
    b.target.level = 0.5;
    b.target.distance = ball_distance(Eigen::Vector3d(0, 0, 0), 1.0);
    b.base_point = Eigen::Vector3d(0, 1, 0);
    return b;
  }

  if (name == "ex6") {
    std::vector<std::string> vars = {"x", "y", "z"};
    b.system.kind = SystemKind::Affine;
    b.system.n = 3;
    b.system.m = 2;
    b.system.state_vars = vars;
    b.system.sigma0 = parse_column({"-y/12", "x/12", "0"}, vars);
    b.system.sigma = {parse_column({"x*z", "y*z", "0"}, vars), parse_column({"0", "0", "1"}, vars)};
    b.target.u = Expr::parse("(x^2 + y^2)/2", vars);
    b.target.level = 0.5;
    b.target.distance = cylinder_distance(1.0);
    b.base_point = Eigen::Vector3d(1, 0, 0);
    return b;
  }

  throw UnknownExample(name);
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw ValidationError(origin + ": " + message);
}

std::vector<std::string> string_array(const json& j, const std::string& origin,
                                      const std::string& field) {
  if (!j.is_array()) fail(origin, "field '" + field + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) fail(origin, "field '" + field + "' must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

Eigen::VectorXd number_array(const json& j, const std::string& origin, const std::string& field) {
  if (!j.is_array()) fail(origin, "field '" + field + "' must be an array of numbers");
  Eigen::VectorXd out(j.size());
  Eigen::Index i = 0;
  for (const auto& item : j) {
    if (!item.is_number()) fail(origin, "field '" + field + "' must be an array of numbers");
    out[i++] = item.get<double>();
  }
  return out;
}

Expr parse_field_expr(const std::string& text, const std::vector<std::string>& vars,
                      const std::string& origin, const std::string& field) {
  try {
    return Expr::parse(text, vars);
  } catch (const SyntaxError& e) {
    fail(origin, "field '" + field + "': " + e.what());
  } catch (const UnknownIdentifier& e) {
    fail(origin, "field '" + field + "': " + e.what());
  }
}

}  // namespace

SystemBundle load_system_json(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; convert to line/column for diagnostics.
    std::size_t byte = e.byte;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) fail(origin, "top level must be a JSON object");

  auto require = [&](const char* field) -> const json& {
    auto it = doc.find(field);
    if (it == doc.end()) fail(origin, std::string("missing required field '") + field + "'");
    return *it;
  };

  SystemBundle b;
  b.name = origin;

  const std::string kind = require("kind").is_string() ? doc["kind"].get<std::string>() : "";
  if (kind == "symmetric") b.system.kind = SystemKind::Symmetric;
  else if (kind == "affine") b.system.kind = SystemKind::Affine;
  else if (kind == "general") b.system.kind = SystemKind::General;
  else fail(origin, "field 'kind' must be one of \"symmetric\", \"affine\", \"general\"");

  if (!require("n").is_number_integer()) fail(origin, "field 'n' must be an integer");
  if (!require("m").is_number_integer()) fail(origin, "field 'm' must be an integer");
  b.system.n = doc["n"].get<int>();
  b.system.m = doc["m"].get<int>();
  if (b.system.n <= 0) fail(origin, "field 'n' must be positive");
  if (b.system.m <= 0) fail(origin, "field 'm' must be positive");

  b.system.state_vars = string_array(require("state_vars"), origin, "state_vars");
  if (static_cast<int>(b.system.state_vars.size()) != b.system.n)
    fail(origin, "field 'state_vars' must list exactly n names");
  const auto& vars = b.system.state_vars;

  if (b.system.kind == SystemKind::Affine) {
    auto texts = string_array(require("sigma0"), origin, "sigma0");
    if (static_cast<int>(texts.size()) != b.system.n)
      fail(origin, "field 'sigma0' must have n entries");
    for (const auto& t : texts)
      b.system.sigma0.push_back(parse_field_expr(t, vars, origin, "sigma0"));
  }

  if (b.system.kind != SystemKind::General) {
    const json& sig = require("sigma");
    if (!sig.is_array() || static_cast<int>(sig.size()) != b.system.n)
      fail(origin, "field 'sigma' must be an n x m array of expression strings");
    b.system.sigma.assign(static_cast<std::size_t>(b.system.m), {});
    for (int i = 0; i < b.system.n; ++i) {
      auto row = string_array(sig[static_cast<std::size_t>(i)], origin, "sigma");
      if (static_cast<int>(row.size()) != b.system.m)
        fail(origin, "field 'sigma' must be an n x m array of expression strings");
      for (int j = 0; j < b.system.m; ++j)
        b.system.sigma[static_cast<std::size_t>(j)].push_back(
            parse_field_expr(row[static_cast<std::size_t>(j)], vars, origin, "sigma"));
    }
  } else {
    const json& controls = require("controls");
    const json& fields = require("fields");
    if (!controls.is_array() || controls.empty())
      fail(origin, "field 'controls' must be a nonempty array");
    if (!fields.is_array() || fields.size() != controls.size())
      fail(origin, "field 'fields' must parallel 'controls'");
    for (std::size_t k = 0; k < controls.size(); ++k) {
      const json& c = controls[k];
      if (!c.is_object() || !c.contains("label") || !c.contains("a"))
        fail(origin, "each control must be an object {label, a}");
      LabeledControl lc;
      lc.label = c["label"].get<std::string>();
      lc.a = number_array(c["a"], origin, "controls[].a");
      if (lc.a.size() != b.system.m) fail(origin, "control '" + lc.label + "' must have m entries");
      for (const auto& other : b.system.controls) {
        if (other.label == lc.label) fail(origin, "duplicate control label '" + lc.label + "'");
      }
      auto texts = string_array(fields[k], origin, "fields");
      if (static_cast<int>(texts.size()) != b.system.n)
        fail(origin, "each entry of 'fields' must have n expressions");
      for (const auto& t : texts) lc.field.push_back(parse_field_expr(t, vars, origin, "fields"));
      b.system.controls.push_back(std::move(lc));
    }
  }

  if (!require("u").is_string()) fail(origin, "field 'u' must be an expression string");
  b.target.u = parse_field_expr(doc["u"].get<std::string>(), vars, origin, "u");
  if (!require("level").is_number()) fail(origin, "field 'level' must be a number");
  b.target.level = doc["level"].get<double>();
  if (!std::isfinite(b.target.level)) fail(origin, "field 'level' must be finite");

  if (doc.contains("u_list")) {
    auto texts = string_array(doc["u_list"], origin, "u_list");
    if (texts.empty()) fail(origin, "field 'u_list', if present, must be nonempty");
    for (const auto& t : texts) b.target.u_list.push_back(parse_field_expr(t, vars, origin, "u_list"));
  }

  b.base_point = number_array(require("base_point"), origin, "base_point");
  if (b.base_point.size() != b.system.n) fail(origin, "field 'base_point' must have n entries");

  return b;
}

SystemBundle load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_system_json(ss.str(), path);
}

std::string system_to_json(const SystemBundle& b, int indent) {
  json doc;
  doc["kind"] = to_string(b.system.kind);
  doc["n"] = b.system.n;
  doc["m"] = b.system.m;
  doc["state_vars"] = b.system.state_vars;
  if (b.system.kind == SystemKind::Affine) {
    json sigma0 = json::array();
    for (const auto& e : b.system.sigma0) sigma0.push_back(e.str());
    doc["sigma0"] = sigma0;
  }
  if (b.system.kind != SystemKind::General) {
    json sigma = json::array();
    for (int i = 0; i < b.system.n; ++i) {
      json row = json::array();
      for (int j = 0; j < b.system.m; ++j)
        row.push_back(b.system.sigma[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].str());
      sigma.push_back(row);
    }
    doc["sigma"] = sigma;
  } else {
    json controls = json::array();
    json fields = json::array();
    for (const auto& lc : b.system.controls) {
      json c;
      c["label"] = lc.label;
      json a = json::array();
      for (Eigen::Index i = 0; i < lc.a.size(); ++i) a.push_back(lc.a[i]);
      c["a"] = a;
      controls.push_back(c);
      json f = json::array();
      for (const auto& e : lc.field) f.push_back(e.str());
      fields.push_back(f);
    }
    doc["controls"] = controls;
    doc["fields"] = fields;
  }
  doc["u"] = b.target.u.str();
  doc["level"] = b.target.level;
  if (!b.target.u_list.empty()) {
    json ul = json::array();
    for (const auto& e : b.target.u_list) ul.push_back(e.str());
    doc["u_list"] = ul;
  }
  json bp = json::array();
  for (Eigen::Index i = 0; i < b.base_point.size(); ++i) bp.push_back(b.base_point[i]);
  doc["base_point"] = bp;
  return doc.dump(indent);
}

}  // namespace stla
