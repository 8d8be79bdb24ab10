#include "cli.hpp"

#include "tissuefit/calibration.hpp"
#include "tissuefit/config.hpp"
#include "tissuefit/errors.hpp"
#include "tissuefit/mesh.hpp"
#include "tissuefit/scenario.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace tissuefit::cli {

namespace {

using nlohmann::json;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open output file: " + path);
  f << text;
  if (!f) throw InvalidArgument("failed writing " + path);
}

std::string short_number(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

std::string curve_text(const ForceDisplacementCurve& c, const std::vector<std::string>& comments) {
  std::ostringstream s;
  write_curve_csv(c, s, comments);
  return s.str();
}

void emit_curve(const ForceDisplacementCurve& c, const std::vector<std::string>& comments, const std::string& path,
                std::ostream& out) {
  if (path.empty() || path == "-") {
    out << curve_text(c, comments);
  } else {
    write_text_file(path, curve_text(c, comments));
  }
}

// --- mesh ------------------------------------------------------------------

struct MeshGenArgs {
  std::vector<double> lengths;
  std::vector<int> divisions;
  std::string units = "m";
  std::string output;
};

int mesh_gen(const MeshGenArgs& a, std::ostream& out) {
  const double scale = unit_scale(parse_length_unit(a.units));
  std::array<double, 3> lengths{};
  std::array<int, 3> div{};
  for (std::size_t i = 0; i < 3; ++i) {
    lengths[i] = a.lengths[i] * scale;
    div[i] = a.divisions[i];
  }
  const HexMesh mesh = generate_box_mesh(lengths, div);
  write_mesh_file(mesh, a.output);
  out << "wrote " << a.output << ": " << mesh.node_count() << " nodes, " << mesh.element_count() << " elements\n";
  return kSuccess;
}

int mesh_info(const std::string& path, bool as_json, std::ostream& out) {
  const HexMesh mesh = read_mesh_file(path);
  const QualityReport q = mesh_quality(mesh);
  if (as_json) {
    json j = {{"nodes", q.node_count},
              {"elements", q.element_count},
              {"mean_jacobian", q.mesh_mean_jacobian},
              {"min_corner_jacobian", q.min_corner_jacobian},
              {"flagged_elements", q.flagged_elements}};
    out << j.dump(2) << '\n';
    return kSuccess;
  }
  out << "nodes                " << q.node_count << '\n'
      << "elements             " << q.element_count << '\n'
      << std::setprecision(6) << "mean_jacobian        " << q.mesh_mean_jacobian << '\n'
      << "min_corner_jacobian  " << q.min_corner_jacobian << '\n'
      << "flagged_elements     " << q.flagged_elements.size() << '\n';
  return kSuccess;
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string output;
  std::string summary;
  std::string history;
};

int simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(a.config);
  const HexMesh mesh = load_mesh(cfg);
  const ExperimentSpec spec = resolved_experiment(cfg, mesh);
  const OgdenParams params = cfg.params();

  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult r = run_experiment(spec, mesh, params, cfg.sim);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::vector<std::string> comments{
      "tissuefit simulate", "mu=" + short_number(params.mu()) + " alpha=" + short_number(params.alpha()) +
                                " nu=" + short_number(params.nu()),
      std::string("kind=") + to_string(spec.kind) + " lateral=" + to_string(spec.lateral),
      "ke_ie_max=" + short_number(r.quasistatic.ke_ie_ratio) + (r.quasistatic.pass ? " quasistatic" : " NOT quasistatic")};
  emit_curve(r.curve, comments, a.output, out);

  if (!a.history.empty()) {
    std::ostringstream h;
    write_result_csv(r.solver, spec.tracked(), h);
    write_text_file(a.history, h.str());
  }

  const auto& s = r.solver;
  json summary = {{"config", json::parse(config_to_json(cfg))},
                  {"nodes", mesh.node_count()},
                  {"elements", mesh.element_count()},
                  {"sample_height_m", spec.sample_height},
                  {"steps", s.steps},
                  {"initial_dt_s", s.initial_dt},
                  {"min_dt_s", s.min_dt},
                  {"ke_ie_max", r.quasistatic.ke_ie_ratio},
                  {"quasistatic_pass", r.quasistatic.pass},
                  {"final_ke_ie", s.final_ke_ie()},
                  {"final_hourglass_ie", s.final_hg_ie()},
                  {"max_energy_balance_error", s.max_balance_error},
                  {"end_displacement_m", r.curve.displacement.empty() ? 0.0 : r.curve.displacement.back()},
                  {"end_force_N", r.curve.force.empty() ? 0.0 : r.curve.force.back()},
                  {"wall_time_s", wall}};
  if (!a.summary.empty()) write_text_file(a.summary, summary.dump(2) + "\n");

  err << "steps " << s.steps << ", dt " << s.initial_dt << " s, KE/IE max " << r.quasistatic.ke_ie_ratio
      << ", hourglass/IE " << s.final_hg_ie() << ", energy balance " << s.max_balance_error << ", wall " << wall
      << " s\n";
  if (!r.quasistatic.pass) err << "warning: kinetic/internal energy ratio exceeds the quasi-static threshold\n";
  return kSuccess;
}

// --- analytic ----------------------------------------------------------------

struct AnalyticArgs {
  double mu = 0.0;
  double alpha = 0.0;
  std::vector<double> lengths;
  std::string units = "m";
  double strain_min = -0.3;
  double strain_max = 0.2;
  int points = 51;
  std::string output;
};

int analytic(const AnalyticArgs& a, std::ostream& out) {
  const OgdenParams params(a.mu, a.alpha);
  const double scale = unit_scale(parse_length_unit(a.units));
  const double area = a.lengths[0] * scale * a.lengths[1] * scale;
  const double height = a.lengths[2] * scale;
  if (a.strain_min > a.strain_max) throw InvalidArgument("--strain-min exceeds --strain-max");
  if (a.points < 1) throw InvalidArgument("--points must be >= 1");
  std::vector<double> strains;
  if (a.strain_min == a.strain_max || a.points == 1) {
    strains.push_back(a.strain_min);
  } else {
    for (int k = 0; k < a.points; ++k) {
      strains.push_back(k + 1 == a.points ? a.strain_max
                                          : a.strain_min + (a.strain_max - a.strain_min) * k / (a.points - 1));
    }
  }
  const auto curve = analytic_curve(params, area, height, strains);
  emit_curve(curve, {"tissuefit analytic", "mu=" + short_number(a.mu) + " alpha=" + short_number(a.alpha)},
             a.output, out);
  return kSuccess;
}

// --- calibrate ---------------------------------------------------------------

struct CalibrateArgs {
  std::string config;
  std::string tension;
  std::string compression;
  std::string forward;
  std::string report;
};

json residual_json(const CurveResidual& r) { return {{"rms_N", r.rms}, {"max_abs_N", r.max_abs}, {"points", r.points}}; }

int calibrate_cmd(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(a.config);
  if (!a.forward.empty()) cfg.calibration.forward = parse_forward_kind(a.forward);
  if (a.tension.empty() && a.compression.empty()) {
    throw InvalidArgument("calibrate needs --tension and/or --compression curves");
  }
  const HexMesh mesh = load_mesh(cfg);
  const ExperimentSpec base = resolved_experiment(cfg, mesh);

  CalibrationProblem problem;
  std::vector<std::string> names;
  const auto add = [&](const std::string& path, TestKind kind) {
    if (path.empty()) return;
    CurveData d;
    d.curve = read_curve_csv(path);
    d.curve.validate();
    d.spec = base;
    d.spec.kind = kind;
    double extreme = 0.0;
    for (double x : d.curve.displacement)
      if (std::abs(x) > std::abs(extreme)) extreme = x;
    d.spec.target_displacement = extreme;
    problem.curves.push_back(std::move(d));
    names.push_back(to_string(kind));
  };
  add(a.tension, TestKind::tension);
  add(a.compression, TestKind::compression);

  const auto& c = cfg.calibration;
  problem.strain_min = c.strain_min;
  problem.strain_max = c.strain_max;
  problem.points_per_curve = c.points_per_curve;
  problem.nu = cfg.nu;
  problem.initial_mu = c.initial_mu;
  problem.initial_alpha = c.initial_alpha;
  problem.settings.restarts = c.restarts;
  problem.settings.seed = c.seed;
  problem.settings.optimizer.max_iterations = c.max_iterations;
  problem.settings.optimizer.x_tolerance = c.x_tolerance;
  problem.settings.optimizer.f_tolerance = c.f_tolerance;
  problem.forward = c.forward == ForwardKind::fe ? fe_forward(mesh, cfg.sim)
                                                 : analytic_forward(cross_section_area(mesh, base.axis));

  const auto start = std::chrono::steady_clock::now();
  const CalibrationResult r = calibrate(problem);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto row = [&out](const std::string& label) -> std::ostream& {
    return out << std::left << std::setw(22) << label << std::right;
  };
  out << std::setprecision(6);
  row("forward model") << to_string(c.forward) << '\n';
  row("mu") << r.params.mu() << " Pa\n";
  row("alpha") << r.params.alpha() << '\n';
  row("objective (RMS)") << r.objective << " N\n";
  row("initial objective") << r.initial_objective << " N\n";
  row("iterations") << r.iterations << '\n';
  row("evaluations") << r.evaluations << '\n';
  row("converged") << (r.converged ? "yes" : "no") << '\n';
  for (std::size_t i = 0; i < r.per_curve.size(); ++i) {
    row(names[i] + " residual") << "RMS " << r.per_curve[i].rms << " N, max " << r.per_curve[i].max_abs << " N\n";
  }
  row("mu spread") << 100.0 * r.mu_spread << " %\n";
  row("alpha spread") << r.alpha_spread << '\n';
  if (r.ill_conditioned) out << "warning: near-optimal parameters spread widely; the data constrain (mu, alpha) poorly\n";

  if (!a.report.empty()) {
    json curves = json::array();
    for (std::size_t i = 0; i < r.per_curve.size(); ++i) {
      json item = residual_json(r.per_curve[i]);
      item["kind"] = names[i];
      curves.push_back(item);
    }
    json restarts = json::array();
    for (const auto& s : r.restarts) {
      restarts.push_back({{"mu", s.mu},
                          {"alpha", s.alpha},
                          {"objective_N", s.objective},
                          {"iterations", s.iterations},
                          {"converged", s.converged}});
    }
    json report = {{"config", json::parse(config_to_json(cfg))},
                   {"mu", r.params.mu()},
                   {"alpha", r.params.alpha()},
                   {"nu", r.params.nu()},
                   {"objective_N", r.objective},
                   {"initial_objective_N", r.initial_objective},
                   {"iterations", r.iterations},
                   {"evaluations", r.evaluations},
                   {"converged", r.converged},
                   {"curves", curves},
                   {"restarts", restarts},
                   {"mu_spread", r.mu_spread},
                   {"alpha_spread", r.alpha_spread},
                   {"ill_conditioned", r.ill_conditioned},
                   {"wall_time_s", wall}};
    write_text_file(a.report, report.dump(2) + "\n");
  }
  if (!r.converged) {
    err << "error: optimizer stopped at the iteration cap before meeting its tolerances\n";
    return kNonConvergence;
  }
  return kSuccess;
}

// --- compare -----------------------------------------------------------------

struct CompareArgs {
  std::string a;
  std::string b;
  std::vector<double> window;
  std::string units = "m";
};

int compare(const CompareArgs& args, std::ostream& out) {
  const auto a = read_curve_csv(args.a);
  const auto b = read_curve_csv(args.b);
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  if (!args.window.empty()) {
    const double scale = unit_scale(parse_length_unit(args.units));
    lo = args.window[0] * scale;
    hi = args.window[1] * scale;
    if (!(lo <= hi)) throw InvalidArgument("--window lower bound exceeds upper bound");
  }
  const CurveComparison c = compare_curves(a, b, lo, hi);
  out << std::setprecision(6) << "points            " << c.points << '\n'
      << "range_m           " << c.lower << ' ' << c.upper << '\n'
      << "max_abs_N         " << c.max_abs << '\n'
      << "max_relative_pct  " << c.max_relative << '\n'
      << "rms_N             " << c.rms << '\n';
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ogden soft-tissue virtual testing and calibration"};
  app.name("tissuefit");
  app.require_subcommand(1);
  app.set_version_flag("--version", "tissuefit 0.1.0");

  auto* mesh = app.add_subcommand("mesh", "Generate or inspect hexahedral meshes");
  mesh->require_subcommand(1);
  MeshGenArgs gen;
  auto* gen_cmd = mesh->add_subcommand("gen", "Write a structured box mesh");
  gen_cmd->add_option("--lengths", gen.lengths, "Box edge lengths x y z")->expected(3)->required();
  gen_cmd->add_option("--div", gen.divisions, "Elements per edge x y z")->expected(3)->required();
  gen_cmd->add_option("--units", gen.units, "Length unit of --lengths (m or mm)");
  gen_cmd->add_option("-o,--output", gen.output, "Mesh file to write")->required();

  std::string info_path;
  bool info_json = false;
  auto* info_cmd = mesh->add_subcommand("info", "Print counts and scaled-Jacobian quality");
  info_cmd->add_option("mesh", info_path, "Mesh file")->required();
  info_cmd->add_flag("--json", info_json, "Print JSON");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a virtual tension or compression test");
  sim_cmd->add_option("config", sim.config, "Run configuration (JSON)")->required();
  sim_cmd->add_option("-o,--output", sim.output, "Curve CSV (default: stdout)");
  sim_cmd->add_option("--summary", sim.summary, "Run summary JSON");
  sim_cmd->add_option("--history", sim.history, "Per-sample energy history CSV");

  AnalyticArgs an;
  auto* an_cmd = app.add_subcommand("analytic", "Closed-form incompressible uniaxial curve");
  an_cmd->add_option("--mu", an.mu, "Shear modulus, Pa")->required();
  an_cmd->add_option("--alpha", an.alpha, "Ogden exponent")->required();
  an_cmd->add_option("--lengths", an.lengths, "Sample edges x y z (z is the loading axis)")->expected(3)->required();
  an_cmd->add_option("--units", an.units, "Length unit of --lengths (m or mm)");
  an_cmd->add_option("--strain-min", an.strain_min, "Lowest nominal strain");
  an_cmd->add_option("--strain-max", an.strain_max, "Highest nominal strain");
  an_cmd->add_option("--points", an.points, "Number of strain samples");
  an_cmd->add_option("-o,--output", an.output, "Curve CSV (default: stdout)");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit mu and alpha to measured curves");
  cal_cmd->add_option("config", cal.config, "Run configuration (JSON)")->required();
  cal_cmd->add_option("--tension", cal.tension, "Tension curve CSV");
  cal_cmd->add_option("--compression", cal.compression, "Compression curve CSV");
  cal_cmd->add_option("--forward", cal.forward, "Forward model (analytic or fe); overrides the config");
  cal_cmd->add_option("--report", cal.report, "Calibration report JSON");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Force differences between two curves");
  cmp_cmd->add_option("a", cmp.a, "Reference curve CSV")->required();
  cmp_cmd->add_option("b", cmp.b, "Curve to compare")->required();
  cmp_cmd->add_option("--window", cmp.window, "Displacement window lower upper")->expected(2);
  cmp_cmd->add_option("--units", cmp.units, "Length unit of --window (m or mm)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }

  try {
    if (*gen_cmd) return mesh_gen(gen, out);
    if (*info_cmd) return mesh_info(info_path, info_json, out);
    if (*sim_cmd) return simulate(sim, out, err);
    if (*an_cmd) return analytic(an, out);
    if (*cal_cmd) return calibrate_cmd(cal, out, err);
    if (*cmp_cmd) return compare(cmp, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const InvalidState& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kValidationError;
}

}  // namespace tissuefit::cli
