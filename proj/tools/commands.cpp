#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <stla/classify.hpp>
#include <stla/hamilton.hpp>
#include <stla/mintime.hpp>
#include <stla/system.hpp>
#include <stla/trajectory.hpp>

namespace stla::cli {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_vec(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s + "]";
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json control_json(const SystemSpec& sys, const Control& c) {
  if (sys.kind == SystemKind::General && c.index >= 0) {
    json j;
    j["index"] = c.index;
    j["label"] = sys.controls[static_cast<std::size_t>(c.index)].label;
    j["a"] = vec_json(c.a);
    return j;
  }
  return vec_json(c.a);
}

std::string control_str(const SystemSpec& sys, const Control& c) {
  if (sys.kind == SystemKind::General && c.index >= 0)
    return sys.controls[static_cast<std::size_t>(c.index)].label + " " + fmt_vec(c.a);
  return fmt_vec(c.a);
}

SystemBundle resolve_bundle(const CommonOptions& options) {
  const bool has_example = !options.example.empty();
  const bool has_input = !options.input.empty();
  if (has_example == has_input)
    throw ValidationError("exactly one of --example and --input is required");
  SystemBundle bundle = has_example
                            ? load_registry(options.example, RegistryOptions{options.ex3_radius})
                            : load_system_file(options.input);
  if (!options.point.empty()) {
    if (static_cast<int>(options.point.size()) != bundle.system.n)
      throw ValidationError("--point must have n = " + std::to_string(bundle.system.n) +
                            " coordinates");
    Eigen::VectorXd p(bundle.system.n);
    for (int i = 0; i < bundle.system.n; ++i) p[i] = options.point[static_cast<std::size_t>(i)];
    bundle.base_point = p;
  }
  return bundle;
}

std::filesystem::path prepare_out_dir(const CommonOptions& options) {
  std::filesystem::path dir = options.out_dir.empty() ? "." : options.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ValidationError("output directory '" + dir.string() + "' is not writable");
  return dir;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

json analysis_json(const SystemSpec& sys, const AnalysisReport& rep) {
  json a;
  a["classification"] = to_string(rep.classification);
  a["point"] = vec_json(rep.point);
  a["level"] = rep.level;
  a["gradient"] = vec_json(rep.gradient);
  a["petrov_margin"] = rep.petrov_margin;
  if (rep.petrov_control) a["petrov_control"] = control_json(sys, *rep.petrov_control);
  a["tangency_residuals"] = rep.tangency_residuals;
  a["tangent"] = rep.tangent;
  a["second_order_margin"] = rep.second_order_margin;
  if (rep.witness_a1) a["witness_a1"] = control_json(sys, *rep.witness_a1);
  if (rep.witness_a2) a["witness_a2"] = control_json(sys, *rep.witness_a2);
  a["case"] = to_string(rep.case_tag);
  if (rep.case_tag == AffineCase::AlphaRelaxed) a["relaxed_case"] = to_string(rep.relaxed_case);
  json matrices;
  if (rep.smat) {
    matrices["S"] = mat_json(rep.smat->S);
    matrices["S_sym"] = mat_json(rep.smat->S_sym);
    matrices["S_skew"] = mat_json(rep.smat->S_skew);
  }
  if (rep.affine) {
    matrices["alpha"] = rep.affine->alpha;
    matrices["beta"] = vec_json(rep.affine->beta);
    matrices["gamma"] = vec_json(rep.affine->gamma);
    matrices["S"] = mat_json(rep.affine->S);
    matrices["Stilde"] = mat_json(rep.affine->Stilde);
  }
  if (rep.kmat) matrices["K"] = mat_json(rep.kmat->K);
  if (rep.eigen) {
    matrices["K_eigenvalues"] = vec_json(rep.eigen->eigenvalues);
    matrices["K_eigenvectors"] = mat_json(rep.eigen->eigenvectors);
    matrices["eigen_residual"] = rep.eigen->residual;
  }
  if (!matrices.empty()) a["matrices"] = matrices;
  return a;
}

json necessary_json(const SystemSpec& sys, const NecessaryReport& rep) {
  json n;
  n["bracket_transversal"] = rep.bracket_transversal;
  n["bracket_value"] = rep.bracket_value;
  if (rep.bracket_a1) n["bracket_a1"] = control_json(sys, *rep.bracket_a1);
  if (rep.bracket_a2) n["bracket_a2"] = control_json(sys, *rep.bracket_a2);
  n["single_field_negative"] = rep.single_field_negative;
  n["single_value"] = rep.single_value;
  if (rep.single_control) n["single_control"] = control_json(sys, *rep.single_control);
  n["precondition_ok"] = rep.precondition_ok;
  n["hypotheses_unchecked"] = rep.hypotheses_unchecked;
  n["verdict"] = rep.holds() ? "NECESSARY_HOLDS" : "NECESSARY_FAILS";
  return n;
}

void print_analysis(std::ostream& out, const SystemBundle& b, const AnalysisReport& rep,
                    const NecessaryReport& nec) {
  const SystemSpec& sys = b.system;
  out << "system: " << b.name << " (" << to_string(sys.kind) << ", n=" << sys.n
      << ", m=" << sys.m << ")\n";
  out << "point:  " << fmt_vec(rep.point) << "   u(point) = " << fmt(b.target.u.value(rep.point))
      << ", target level = " << fmt(rep.level) << "\n";
  out << "grad u: " << fmt_vec(rep.gradient) << "\n";
  out << "petrov margin: " << fmt(rep.petrov_margin);
  if (rep.petrov_control) out << "   (best control " << control_str(sys, *rep.petrov_control) << ")";
  out << "\n";
  if (!rep.tangency_residuals.empty()) {
    out << "tangency residuals:";
    for (double r : rep.tangency_residuals) out << " " << fmt(r);
    out << (rep.tangent ? "   (tangent)" : "   (not tangent)") << "\n";
  }
  out << "classification: " << to_string(rep.classification) << "\n";
  if (rep.classification == Classification::SecondOrder) {
    out << "second-order margin: " << fmt(rep.second_order_margin) << "\n";
    out << "witness a1: " << control_str(sys, *rep.witness_a1) << "\n";
    out << "witness a2: " << control_str(sys, *rep.witness_a2) << "\n";
    if (rep.case_tag != AffineCase::None) {
      out << "affine case: " << to_string(rep.case_tag);
      if (rep.case_tag == AffineCase::AlphaRelaxed)
        out << " (via " << to_string(rep.relaxed_case) << ")";
      out << "\n";
    }
  }
  if (rep.smat) {
    out << "S = " << rep.smat->S.format(Eigen::IOFormat(12, 0, ", ", "; ", "", "", "[", "]"))
        << "\n";
  }
  if (rep.affine) {
    out << "alpha = " << fmt(rep.affine->alpha) << ", beta = " << fmt_vec(rep.affine->beta)
        << ", gamma = " << fmt_vec(rep.affine->gamma) << "\n";
    out << "S = " << rep.affine->S.format(Eigen::IOFormat(12, 0, ", ", "; ", "", "", "[", "]"))
        << "\n";
  }
  if (rep.eigen) {
    out << "K eigenvalues: " << fmt_vec(rep.eigen->eigenvalues) << "\n";
  }
  out << "necessary conditions: " << (nec.holds() ? "NECESSARY_HOLDS" : "NECESSARY_FAILS") << "\n";
  out << "  bracket transversal: " << (nec.bracket_transversal ? "yes" : "no")
      << " (best value " << fmt(nec.bracket_value) << ")\n";
  out << "  single field negative: " << (nec.single_field_negative ? "yes" : "no")
      << " (best value " << fmt(nec.single_value) << ")\n";
  if (!nec.precondition_ok) out << "  note: tangency hypotheses do not hold at this point\n";
  if (nec.hypotheses_unchecked) out << "  note: convexity of f(x, .) not verified for general systems\n";
}

int classification_exit(const AnalysisReport& rep) {
  switch (rep.classification) {
    case Classification::FirstOrderPetrov:
    case Classification::SecondOrder:
      return kOk;
    case Classification::Inconclusive:
      return kInconclusive;
    case Classification::DegenerateGradient:
      return kDegenerateGradient;
  }
  return kUsage;
}

std::vector<Eigen::VectorXd> parse_directions(const std::string& spec, const SystemBundle& b,
                                              const Eigen::VectorXd& grad) {
  std::vector<Eigen::VectorXd> dirs;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ';')) {
    if (token.empty()) continue;
    if (token == "normal") {
      if (grad.norm() <= 0.0) throw ValidationError("normal direction undefined: zero gradient");
      dirs.push_back(grad / grad.norm());
      continue;
    }
    if (token[0] == '+' || token[0] == '-') {
      const std::string name = token.substr(1);
      const auto& vars = b.system.state_vars;
      auto it = std::find(vars.begin(), vars.end(), name);
      if (it != vars.end()) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(b.system.n);
        d[std::distance(vars.begin(), it)] = token[0] == '+' ? 1.0 : -1.0;
        dirs.push_back(d);
        continue;
      }
    }
    // CSV vector
    std::vector<double> values;
    std::stringstream cs(token);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (...) {
        throw ValidationError("cannot parse direction '" + token + "'");
      }
    }
    if (static_cast<int>(values.size()) != b.system.n)
      throw ValidationError("direction '" + token + "' must have n coordinates");
    Eigen::VectorXd d(b.system.n);
    for (int i = 0; i < b.system.n; ++i) d[i] = values[static_cast<std::size_t>(i)];
    if (d.norm() <= 0.0) throw ValidationError("direction must be nonzero");
    dirs.push_back(d / d.norm());
  }
  if (dirs.empty()) throw ValidationError("no directions given");
  return dirs;
}

std::vector<double> parse_deltas(const std::string& spec) {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 || !(lo > 0.0) ||
      !(hi > lo) || count < 2)
    throw ValidationError("--deltas must be LO:HI:N with 0 < LO < HI and N >= 2");
  auto ascending = log_spaced(lo, hi, count);
  return {ascending.rbegin(), ascending.rend()};
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownExample& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "evaluation error: " << e.what() << "\n";
    return kDomainError;
  } catch (const IntegrationDiverged& e) {
    err << "integration diverged: " << e.what() << " at t = " << e.last_time() << "\n";
    return kDiverged;
  }
}

}  // namespace

int run_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const SystemBundle b = resolve_bundle(options.common);
    const auto dir = prepare_out_dir(options.common);

    const AnalysisReport rep =
        classify_point(b.system, b.target.u, b.target.level, b.base_point, options.common.tol);
    const NecessaryReport nec =
        check_necessary(b.system, b.target.u, b.base_point, options.common.tol);

    json doc;
    doc["command"] = "analyze";
    doc["input"] = json::parse(system_to_json(b));
    doc["tolerance"] = options.common.tol;
    doc["analysis"] = analysis_json(b.system, rep);
    doc["necessary"] = necessary_json(b.system, nec);

    if (!b.target.u_list.empty()) {
      std::vector<Expr> targets = b.target.u_list;
      const IntersectionReport inter =
          classify_intersection(b.system, targets, b.base_point, options.common.tol);
      json ij;
      ij["found"] = inter.found;
      if (inter.found) {
        ij["a1"] = control_json(b.system, *inter.a1);
        ij["a2"] = control_json(b.system, *inter.a2);
        ij["case_per_target"] = inter.case_per_target;
        ij["value_per_target"] = inter.value_per_target;
      }
      doc["intersection"] = ij;
      out << "intersection target: " << (inter.found ? "common pair found" : "NOT_FOUND") << "\n";
    }

    write_text_file(dir / "report.json", doc.dump(2));

    if (options.common.json) {
      out << doc.dump(2) << "\n";
    } else {
      print_analysis(out, b, rep, nec);
      out << "report: " << (dir / "report.json").string() << "\n";
    }
    return classification_exit(rep);
  });
}

int run_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const SystemBundle b = resolve_bundle(options.common);
    const auto dir = prepare_out_dir(options.common);
    if (!(options.t > 0.0)) throw ValidationError("--t must be positive");

    const AnalysisReport rep =
        classify_point(b.system, b.target.u, b.target.level, b.base_point, options.common.tol);
    Control a1, a2;
    if (rep.witness_a1 && rep.witness_a2) {
      a1 = *rep.witness_a1;
      a2 = *rep.witness_a2;
    } else if (rep.petrov_control) {
      a1 = a2 = *rep.petrov_control;
    } else {
      err << "no witness controls available at this point (" << to_string(rep.classification)
          << ")\n";
      return classification_exit(rep);
    }

    const double h = options.step > 0.0 ? options.step : options.t / 1000.0;
    const TrajectoryRecord record =
        integrate_switched(b.system, b.base_point, a1, a2, options.t, h, &b.target.u);
    std::ostringstream csv;
    write_trajectory_csv(csv, b.system, record);
    write_text_file(dir / "trajectory.csv", csv.str());

    json doc;
    doc["command"] = "simulate";
    doc["input"] = json::parse(system_to_json(b));
    doc["t"] = options.t;
    doc["step"] = h;
    doc["witness_a1"] = control_json(b.system, a1);
    doc["witness_a2"] = control_json(b.system, a2);
    doc["u_start"] = record.u_values.front();
    doc["u_end"] = record.u_values.back();

    // Remainder order of the two expansions over dyadic leg times.
    std::vector<double> ts, state_res, value_res;
    for (int k = 4; k <= 10; ++k) {
      const double t = std::pow(2.0, -k);
      ts.push_back(t);
      state_res.push_back(taylor_residual_state(b.system, b.base_point, a1, a2, t, t / 1000.0));
      value_res.push_back(
          taylor_residual_value(b.system, b.target.u, b.base_point, a1, a2, t, t / 1000.0));
    }
    doc["taylor_t"] = ts;
    doc["state_residuals"] = state_res;
    doc["value_residuals"] = value_res;

    auto report_fit = [&](const char* tag, const std::vector<double>& rs) {
      try {
        const OrderFit fit = order_fit(ts, rs);
        json f;
        f["slope"] = fit.slope;
        f["intercept"] = fit.intercept;
        f["r2"] = fit.r2;
        f["used"] = fit.used;
        f["exact"] = false;
        doc[tag] = f;
        out << tag << ": slope " << fmt(fit.slope) << ", r2 " << fmt(fit.r2) << "\n";
      } catch (const DegenerateFit&) {
        json f;
        f["exact"] = true;
        doc[tag] = f;
        out << tag << ": expansion exact to roundoff\n";
      }
    };
    out << "simulated [0, " << fmt(2 * options.t) << "] with " << (record.states.size() - 1)
        << " steps; u " << fmt(record.u_values.front()) << " -> " << fmt(record.u_values.back())
        << "\n";
    report_fit("state_order", state_res);
    report_fit("value_order", value_res);

    write_text_file(dir / "taylor.json", doc.dump(2));
    out << "trajectory: " << (dir / "trajectory.csv").string() << "\n";
    if (options.common.json) out << doc.dump(2) << "\n";
    return kOk;
  });
}

int run_mintime(const MintimeOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const SystemBundle b = resolve_bundle(options.common);
    const auto dir = prepare_out_dir(options.common);

    const AnalysisReport rep =
        classify_point(b.system, b.target.u, b.target.level, b.base_point, options.common.tol);

    SweepPlan plan;
    plan.horizon = options.horizon;
    plan.step = options.step;
    plan.switch_times = default_switch_times(options.horizon, options.switch_count);
    plan.candidates = candidate_pairs(b.system, rep, options.random_pairs);
    plan.deltas = parse_deltas(options.deltas);
    plan.directions = parse_directions(options.dirs, b, rep.gradient);

    const MinTimeEstimate est = exponent_sweep(b.system, b.target, b.base_point, plan);

    std::ostringstream csv;
    write_sweep_csv(csv, b.system, est);
    write_text_file(dir / "sweep.csv", csv.str());

    json doc;
    doc["command"] = "mintime";
    doc["input"] = json::parse(system_to_json(b));
    doc["classification"] = to_string(rep.classification);
    doc["fit_ok"] = est.fit_ok;
    if (est.fit_ok) {
      doc["exponent"] = est.fit.exponent;
      doc["constant"] = est.fit.constant;
      doc["r2"] = est.fit.r2;
      doc["envelope_max"] = est.envelope_max;
      doc["envelope_slope"] = est.envelope_slope;
    }
    if (est.distance_fit) {
      doc["distance_exponent"] = est.distance_fit->exponent;
      doc["distance_constant"] = est.distance_fit->constant;
      doc["distance_r2"] = est.distance_fit->r2;
    }
    doc["unreached_fraction"] = est.unreached_fraction;
    write_text_file(dir / "mintime.json", doc.dump(2));

    out << "point classification: " << to_string(rep.classification) << "\n";
    if (est.fit_ok) {
      out << "fit: T ~ " << fmt(est.fit.constant) << " * delta^" << fmt(est.fit.exponent)
          << "  (r2 " << fmt(est.fit.r2) << ")\n";
      out << "envelope max T/sqrt(delta): " << fmt(est.envelope_max) << ", trend slope "
          << fmt(est.envelope_slope) << "\n";
    } else {
      out << "fit unavailable (too few reached points)\n";
    }
    if (est.distance_fit)
      out << "distance fit: T ~ " << fmt(est.distance_fit->constant) << " * d^"
          << fmt(est.distance_fit->exponent) << "  (r2 " << fmt(est.distance_fit->r2) << ")\n";
    out << "unreached fraction: " << fmt(est.unreached_fraction) << "\n";
    out << "sweep: " << (dir / "sweep.csv").string() << "\n";
    if (options.common.json) out << doc.dump(2) << "\n";

    if (rep.classification == Classification::SecondOrder && est.unreached_fraction > 0.1)
      return kUnreached;
    return kOk;
  });
}

int run_scan(const ScanOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const SystemBundle b = resolve_bundle(options.common);
    const auto dir = prepare_out_dir(options.common);

    const ScanReport scan =
        neighborhood_scan(b.system, b.target.u, b.target.level, b.base_point, options.box,
                          options.grid, options.rho, options.common.tol);

    std::ostringstream csvout;
    {
      char buf[32];
      auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        csvout << buf;
      };
      for (const auto& name : b.system.state_vars) csvout << name << ",";
      csvout << "margin_best,margin_center_pair,first_order_center_pair,pass\n";
      for (const auto& pt : scan.points) {
        for (Eigen::Index i = 0; i < pt.x.size(); ++i) {
          emit(pt.x[i]);
          csvout << ",";
        }
        emit(pt.margin_best);
        csvout << ",";
        emit(pt.margin_center_pair);
        csvout << ",";
        emit(pt.first_order_center_pair);
        csvout << "," << (pt.pass ? 1 : 0) << "\n";
      }
    }
    write_text_file(dir / "scan.csv", csvout.str());

    out << "scan around " << fmt_vec(scan.xbar) << ", box radius " << fmt(scan.radius) << ", "
        << scan.grid_per_axis << " points per axis, rho = " << fmt(scan.rho) << "\n";
    out << "min margin (best pair per point): " << fmt(scan.min_margin_best) << "\n";
    out << "min margin (center witness pair): " << fmt(scan.min_margin_center) << "\n";
    out << "strict supersolution with center pair: " << (scan.supersolution_holds ? "yes" : "no")
        << "\n";
    out << "outward-pointing points (center pair): " << scan.outward_points.size() << "\n";
    if (!scan.violations.empty()) {
      out << "violations (" << scan.violations.size() << "):\n";
      for (std::size_t idx : scan.violations)
        out << "  " << fmt_vec(scan.points[idx].x) << "  margin "
            << fmt(scan.points[idx].margin_best) << "\n";
    }
    out << "scan csv: " << (dir / "scan.csv").string() << "\n";
    return scan.all_pass ? kOk : kScanViolation;
  });
}

int run_examples(const ExamplesOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    json list = json::array();
    for (const auto& name : registry_names()) {
      const SystemBundle b = load_registry(name);
      const RegistryEntry entry = registry_entry(name);
      json j;
      j["name"] = name;
      j["kind"] = to_string(b.system.kind);
      j["n"] = b.system.n;
      j["m"] = b.system.m;
      j["base_point"] = vec_json(b.base_point);
      j["level"] = b.target.level;
      j["summary"] = entry.summary;
      j["expected_classification"] = entry.expected_classification;
      list.push_back(j);
    }
    if (options.json) {
      out << list.dump(2) << "\n";
      return kOk;
    }
    for (const auto& j : list) {
      out << j["name"].get<std::string>() << ": " << j["kind"].get<std::string>() << " n="
          << j["n"].get<int>() << " m=" << j["m"].get<int>() << " base=";
      out << j["base_point"].dump() << " level=" << fmt(j["level"].get<double>()) << "\n    "
          << j["summary"].get<std::string>() << " -> expected "
          << j["expected_classification"].get<std::string>() << "\n";
    }
    return kOk;
  });
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"second order small-time local attainability analysis"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--example", common.example, "registry example name (ex1..ex6)");
    cmd->add_option("--input", common.input, "JSON system/target file");
    cmd->add_option("--point", common.point, "point override, comma separated")->delimiter(',');
    cmd->add_option("--tol", common.tol, "classification tolerance");
    cmd->add_option("--out", common.out_dir, "output directory");
    cmd->add_flag("--json", common.json, "emit machine readable output");
    cmd->add_option("--ex3-radius", common.ex3_radius, "ambient target radius for ex3");
  };

  AnalyzeOptions analyze;
  CLI::App* cmd_analyze = app.add_subcommand("analyze", "classify a point and report witnesses");
  add_common(cmd_analyze, analyze.common);

  SimulateOptions simulate;
  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "integrate the witness trajectory and fit remainder orders");
  add_common(cmd_simulate, simulate.common);
  cmd_simulate->add_option("--t", simulate.t, "leg duration (trajectory covers [0, 2t])");
  cmd_simulate->add_option("--step", simulate.step, "RK4 step (default t/1000)");
  cmd_simulate->add_flag("--witness", simulate.witness, "use the classifier witness (default)");

  MintimeOptions mintime;
  CLI::App* cmd_mintime =
      app.add_subcommand("mintime", "hitting-time sweep and exponent fit near the base point");
  add_common(cmd_mintime, mintime.common);
  cmd_mintime->add_option("--deltas", mintime.deltas, "LO:HI:N log spaced offsets");
  cmd_mintime->add_option("--dirs", mintime.dirs, "normal | +var/-var | CSV vectors, ';' separated");
  cmd_mintime->add_option("--horizon", mintime.horizon, "integration horizon");
  cmd_mintime->add_option("--step", mintime.step, "RK4 step");
  cmd_mintime->add_option("--switch-times", mintime.switch_count, "switch grid size");
  cmd_mintime->add_option("--random-pairs", mintime.random_pairs, "random candidate pairs");

  ScanOptions scan;
  CLI::App* cmd_scan = app.add_subcommand("scan", "margin field over a box around the point");
  add_common(cmd_scan, scan.common);
  cmd_scan->add_option("--box", scan.box, "box radius");
  cmd_scan->add_option("--grid", scan.grid, "grid points per axis");
  cmd_scan->add_option("--rho", scan.rho, "required margin");

  ExamplesOptions examples;
  CLI::App* cmd_examples = app.add_subcommand("examples", "list the built-in examples");
  cmd_examples->add_flag("--json", examples.json, "emit machine readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << app.help();
    return kUsage;
  }

  if (cmd_analyze->parsed()) return run_analyze(analyze, out, err);
  if (cmd_simulate->parsed()) return run_simulate(simulate, out, err);
  if (cmd_mintime->parsed()) return run_mintime(mintime, out, err);
  if (cmd_scan->parsed()) return run_scan(scan, out, err);
  if (cmd_examples->parsed()) return run_examples(examples, out, err);
  err << app.help();
  return kUsage;
}

}  // namespace stla::cli
