#include "tissuefit/scenario.hpp"

#include "tissuefit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tissuefit {

const char* to_string(TestKind k) noexcept { return k == TestKind::tension ? "tension" : "compression"; }

TestKind parse_test_kind(const std::string& s) {
  if (s == "tension") return TestKind::tension;
  if (s == "compression") return TestKind::compression;
  throw InvalidArgument("unknown test kind '" + s + "' (expected tension or compression)");
}

const char* to_string(LateralMode m) noexcept { return m == LateralMode::bonded ? "bonded" : "free"; }

LateralMode parse_lateral_mode(const std::string& s) {
  if (s == "bonded") return LateralMode::bonded;
  if (s == "free") return LateralMode::free;
  throw InvalidArgument("unknown lateral mode '" + s + "' (expected bonded or free)");
}

void ExperimentSpec::validate(const HexMesh& mesh) const {
  if (!(loading_speed > 0.0) || !std::isfinite(loading_speed)) {
    throw InvalidArgument("loading speed must be positive");
  }
  if (!std::isfinite(target_displacement)) throw InvalidArgument("target displacement must be finite");
  if (kind == TestKind::tension && target_displacement < 0.0) {
    throw InvalidArgument("tension requires a non-negative target displacement");
  }
  if (kind == TestKind::compression && target_displacement > 0.0) {
    throw InvalidArgument("compression requires a non-positive target displacement");
  }
  if (!(sample_height > 0.0)) throw InvalidArgument("sample height must be positive");
  if (base_set == load_set) throw InvalidArgument("base set and load set must differ ('" + base_set + "')");
  const auto& base = mesh.node_set(base_set);
  const auto& load = mesh.node_set(load_set);
  (void)mesh.node_set(tracked());
  for (const auto& r : rollers) (void)mesh.node_set(r.node_set);
  std::vector<std::size_t> a(base), b(load), common;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (!common.empty()) {
    throw InvalidArgument("base set '" + base_set + "' and load set '" + load_set + "' share node " +
                          std::to_string(common.front() + 1));
  }
}

ExperimentSpec homogeneous_spec(TestKind kind, double target_displacement, double sample_height) {
  ExperimentSpec s;
  s.kind = kind;
  s.target_displacement = target_displacement;
  s.sample_height = sample_height;
  s.lateral = LateralMode::free;
  s.rollers = {{"xmin", Axis::x}, {"ymin", Axis::y}};
  return s;
}

void ForceDisplacementCurve::validate() const {
  if (displacement.size() != force.size()) throw InvalidArgument("curve columns differ in length");
  int direction = 0;
  for (std::size_t i = 0; i < displacement.size(); ++i) {
    if (!std::isfinite(displacement[i]) || !std::isfinite(force[i])) {
      throw InvalidArgument("curve sample " + std::to_string(i + 1) + " is not finite");
    }
    if (i == 0 || displacement[i] == displacement[i - 1]) continue;
    const int step = displacement[i] > displacement[i - 1] ? 1 : -1;
    if (direction != 0 && step != direction) {
      throw InvalidArgument("curve displacements are not monotone at sample " + std::to_string(i + 1));
    }
    direction = step;
  }
}

std::vector<BoundaryCondition> build_bcs(const ExperimentSpec& spec, const HexMesh& mesh,
                                         const SimConfig& cfg) {
  cfg.validate();
  spec.validate(mesh);
  double ramp = std::abs(spec.target_displacement) / (spec.loading_speed * cfg.rate_scaling);
  if (!(ramp > 0.0)) ramp = cfg.output_interval / cfg.rate_scaling;

  std::vector<BoundaryCondition> bcs;
  if (spec.lateral == LateralMode::bonded) {
    bcs.push_back(BoundaryCondition::fixed(spec.base_set));
    bcs.push_back(BoundaryCondition::lateral(spec.load_set, spec.axis));
  } else {
    bcs.push_back(BoundaryCondition::axial(spec.base_set, spec.axis, 0.0, ramp));
    for (const auto& r : spec.rollers) bcs.push_back(BoundaryCondition::axial(r.node_set, r.axis, 0.0, ramp));
  }
  bcs.push_back(BoundaryCondition::axial(spec.load_set, spec.axis, spec.target_displacement, ramp));
  return bcs;
}

double nominal_strain(double displacement, double sample_height) {
  if (!(sample_height > 0.0)) throw InvalidArgument("sample height must be positive");
  return displacement / sample_height;
}

QuasiStaticCheck quasistatic_check(const SolverResult& result, double threshold) {
  QuasiStaticCheck out;
  const double start = 0.1 * result.ramp_duration;
  for (std::size_t i = 0; i < result.time.size(); ++i) {
    if (result.time[i] < start) continue;
    const auto& e = result.energies[i];
    if (!(e.internal > 0.0)) continue;
    out.ke_ie_ratio = std::max(out.ke_ie_ratio, e.kinetic / e.internal);
  }
  out.pass = out.ke_ie_ratio <= threshold;
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const HexMesh& mesh, const OgdenParams& p,
                                const SimConfig& cfg) {
  const auto bcs = build_bcs(spec, mesh, cfg);
  RunOptions opts;
  opts.axis = spec.axis;
  opts.tracked_sets = {spec.tracked()};
  if (spec.tracked() != spec.load_set) opts.tracked_sets.push_back(spec.load_set);

  ExperimentResult out;
  out.solver = run_simulation(mesh, bcs, cfg, p, opts);
  const auto& force = reaction_force(out.solver, spec.tracked());
  out.curve.displacement = out.solver.displacement;
  out.curve.force = force;
  if (spec.tracked() == spec.load_set) {
    for (double& f : out.curve.force) f = -f;
  }
  out.quasistatic = quasistatic_check(out.solver, cfg.ke_ie_threshold);
  return out;
}

}  // namespace tissuefit
