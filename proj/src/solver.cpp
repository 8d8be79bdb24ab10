#include "hex_shape.hpp"
#include "number_text.hpp"
#include "tissuefit/dynamics.hpp"
#include "tissuefit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>

#ifdef TISSUEFIT_HAVE_OPENMP
#include <omp.h>
#endif

namespace tissuefit {

const char* to_string(Axis a) noexcept {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    default: return "z";
  }
}

Axis parse_axis(const std::string& s) {
  if (s == "x" || s == "X") return Axis::x;
  if (s == "y" || s == "Y") return Axis::y;
  if (s == "z" || s == "Z") return Axis::z;
  throw InvalidArgument("unknown axis '" + s + "' (expected x, y or z)");
}

void SimConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
  };
  require(std::isfinite(density) && density > 0.0, "sim.density must be positive");
  require(dt_safety > 0.0 && dt_safety <= 1.0, "sim.dt_safety must lie in (0, 1]");
  require(std::isfinite(hourglass_coefficient) && hourglass_coefficient >= 0.0,
          "sim.hourglass_coefficient must be >= 0");
  require(std::isfinite(mass_scaling) && mass_scaling >= 1.0, "sim.mass_scaling must be >= 1");
  require(std::isfinite(rate_scaling) && rate_scaling >= 1.0, "sim.rate_scaling must be >= 1");
  require(std::isfinite(output_interval) && output_interval > 0.0, "sim.output_interval must be positive");
  require(std::isfinite(ke_ie_threshold) && ke_ie_threshold >= 0.0, "sim.ke_ie_threshold must be >= 0");
}

BoundaryCondition BoundaryCondition::fixed(std::string set) {
  BoundaryCondition bc;
  bc.kind = BcKind::fixed_all;
  bc.node_set = std::move(set);
  return bc;
}

BoundaryCondition BoundaryCondition::lateral(std::string set, Axis axis) {
  BoundaryCondition bc;
  bc.kind = BcKind::fixed_lateral;
  bc.node_set = std::move(set);
  bc.axis = axis;
  return bc;
}

BoundaryCondition BoundaryCondition::axial(std::string set, Axis axis, double displacement, double ramp) {
  BoundaryCondition bc;
  bc.kind = BcKind::prescribed_axial;
  bc.node_set = std::move(set);
  bc.axis = axis;
  bc.total_displacement = displacement;
  bc.ramp_duration = ramp;
  return bc;
}

double smooth_step(double xi) {
  xi = std::clamp(xi, 0.0, 1.0);
  return xi * xi * xi * (10.0 - 15.0 * xi + 6.0 * xi * xi);
}

std::vector<double> lumped_masses(const HexMesh& mesh, double density, double mass_scaling) {
  if (!(density > 0.0) || !std::isfinite(density)) throw InvalidArgument("density must be positive");
  if (!(mass_scaling > 0.0) || !std::isfinite(mass_scaling)) throw InvalidArgument("mass scaling must be positive");
  std::vector<double> mass(mesh.node_count(), 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double v = hex_volume(mesh.element_coords(e));
    if (!(v > 0.0)) {
      throw InvalidState("element " + std::to_string(e + 1) + " has non-positive volume");
    }
    const double share = density * v * mass_scaling / 8.0;
    for (std::size_t n : mesh.element(e)) mass[n] += share;
  }
  return mass;
}

namespace {

constexpr std::array<std::array<int, 4>, 6> kFaces{{
    {0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7},
}};

double characteristic_length(const ElementCoords& x) {
  double max_area = 0.0;
  for (const auto& f : kFaces) {
    const Vec3 d1 = x[f[2]] - x[f[0]];
    const Vec3 d2 = x[f[3]] - x[f[1]];
    max_area = std::max(max_area, 0.5 * d1.cross(d2).norm());
  }
  const double v = hex_volume(x);
  if (!(v > 0.0) || !(max_area > 0.0)) throw InvalidState("degenerate element in time-step estimate");
  return v / max_area;
}

}  // namespace

double stable_time_step(const HexMesh& mesh, const OgdenParams& p, const SimConfig& cfg) {
  cfg.validate();
  if (mesh.empty()) throw InvalidArgument("stable time step requested for an empty mesh");
  const double modulus = p.bulk_modulus() + 4.0 / 3.0 * p.mu();
  const double c = std::sqrt(modulus / (cfg.density * cfg.mass_scaling));
  double lmin = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    lmin = std::min(lmin, characteristic_length(mesh.element_coords(e)));
  }
  return cfg.dt_safety * lmin / c;
}

DofConstraints::DofConstraints(const HexMesh& mesh, std::span<const BoundaryCondition> bcs)
    : slot_(3 * mesh.node_count(), -1) {
  const auto assign = [&](std::size_t node, int comp, Prescription pr, const BoundaryCondition& bc) {
    int& s = slot_[3 * node + comp];
    if (s < 0) {
      s = static_cast<int>(prescriptions_.size());
      prescriptions_.push_back(pr);
      return;
    }
    const Prescription& old = prescriptions_[s];
    const bool both_zero = old.total == 0.0 && pr.total == 0.0;
    const bool same = old.total == pr.total && old.ramp == pr.ramp;
    if (!both_zero && !same) {
      throw InvalidArgument("node " + std::to_string(node + 1) + " in set '" + bc.node_set +
                            "' receives conflicting prescriptions along " +
                            to_string(static_cast<Axis>(comp)));
    }
  };

  for (const auto& bc : bcs) {
    const auto& nodes = mesh.node_set(bc.node_set);
    switch (bc.kind) {
      case BcKind::fixed_all:
        for (std::size_t n : nodes)
          for (int c = 0; c < 3; ++c) assign(n, c, {0.0, 0.0}, bc);
        break;
      case BcKind::fixed_lateral:
        for (std::size_t n : nodes)
          for (int c = 0; c < 3; ++c)
            if (c != component(bc.axis)) assign(n, c, {0.0, 0.0}, bc);
        break;
      case BcKind::prescribed_axial:
        if (!std::isfinite(bc.total_displacement)) {
          throw InvalidArgument("set '" + bc.node_set + "': displacement must be finite");
        }
        if (!(bc.ramp_duration > 0.0) || !std::isfinite(bc.ramp_duration)) {
          throw InvalidArgument("set '" + bc.node_set + "': ramp duration must be positive");
        }
        for (std::size_t n : nodes) {
          assign(n, component(bc.axis), {bc.total_displacement, bc.ramp_duration}, bc);
        }
        if (bc.total_displacement != 0.0) ramp_end_ = std::max(ramp_end_, bc.ramp_duration);
        break;
    }
  }
}

double DofConstraints::displacement(std::size_t node, int comp, double t) const {
  const int s = slot_[3 * node + comp];
  if (s < 0) return 0.0;
  const Prescription& pr = prescriptions_[s];
  if (pr.total == 0.0) return 0.0;
  return pr.total * smooth_step(t / pr.ramp);
}

double EnergyLedger::balance_error(double floor) const noexcept {
  const double scale = std::max({external_work, internal, floor});
  if (!(scale > 0.0)) return std::abs(imbalance()) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::abs(imbalance()) / scale;
}

ExplicitModel::ExplicitModel(const HexMesh& mesh, const OgdenParams& p, const SimConfig& cfg,
                             std::span<const BoundaryCondition> bcs)
    : mesh_(mesh), params_(p), cfg_(cfg), constraints_(mesh, bcs) {
  cfg_.validate();
  if (mesh_.empty()) throw InvalidArgument("simulation requires a non-empty mesh");
  reference_.reserve(mesh_.element_count());
  for (std::size_t e = 0; e < mesh_.element_count(); ++e) {
    try {
      reference_.push_back(make_reference_element(mesh_.element_coords(e)));
    } catch (const InvalidState& err) {
      throw InvalidState("element " + std::to_string(e + 1) + ": " + err.what());
    }
  }

  gather_offset_.assign(mesh_.node_count() + 1, 0);
  for (const auto& conn : mesh_.elements())
    for (std::size_t n : conn) ++gather_offset_[n + 1];
  for (std::size_t n = 0; n < mesh_.node_count(); ++n) gather_offset_[n + 1] += gather_offset_[n];
  gather_slot_.resize(gather_offset_.back());
  std::vector<std::size_t> fill(gather_offset_.begin(), gather_offset_.end() - 1);
  for (std::size_t e = 0; e < mesh_.element_count(); ++e) {
    for (int a = 0; a < 8; ++a) gather_slot_[fill[mesh_.element(e)[a]]++] = 8 * e + a;
  }

#ifdef TISSUEFIT_HAVE_OPENMP
  threads_ = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("TISSUEFIT_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) threads_ = n;
  }
}

SimulationState ExplicitModel::initial_state() const {
  SimulationState s;
  s.positions = mesh_.nodes();
  s.velocities.assign(mesh_.node_count(), Vec3::Zero());
  s.accelerations.assign(mesh_.node_count(), Vec3::Zero());
  s.lumped_mass = lumped_masses(mesh_, cfg_.density, cfg_.mass_scaling);
  return s;
}

InternalForces ExplicitModel::internal_forces(std::span<const Vec3> positions, double time) const {
  const std::size_t ne = reference_.size();
  std::vector<std::array<Vec3, 8>> element_force(ne);
  std::vector<double> energy(ne, 0.0);
  std::vector<double> hourglass(ne, 0.0);
  std::vector<double> failed_det(ne, 1.0);
  InternalForces out;
  out.wave_modulus.assign(ne, 0.0);

  [[maybe_unused]] const int threads = threads_;
  [[maybe_unused]] const bool parallel = threads > 1 && ne >= 64;
#pragma omp parallel for num_threads(threads) if (parallel) schedule(static)
  for (std::ptrdiff_t ie = 0; ie < static_cast<std::ptrdiff_t>(ne); ++ie) {
    const auto e = static_cast<std::size_t>(ie);
    const auto& conn = mesh_.element(e);
    ElementCoords current;
    for (int a = 0; a < 8; ++a) current[a] = positions[conn[a]];
    const double det = centroid_deformation_gradient(reference_[e], current).determinant();
    if (!(det > 0.0)) {
      failed_det[e] = det;
      continue;
    }
    const ElementForce ef = element_internal_force(reference_[e], current, params_);
    const HourglassForce hg = hourglass_force(reference_[e], current, params_, cfg_.hourglass_coefficient);
    for (int a = 0; a < 8; ++a) element_force[e][a] = ef.force[a] + hg.force[a];
    energy[e] = ef.energy;
    hourglass[e] = hg.energy;
    out.wave_modulus[e] =
        params_.bulk_modulus() + 4.0 / 3.0 * effective_shear_modulus(ef.stress.stretches, params_);
  }

  for (std::size_t e = 0; e < ne; ++e) {
    if (!(failed_det[e] > 0.0)) throw ElementInversion(e + 1, time, failed_det[e]);
  }

  out.nodal.assign(mesh_.node_count(), Vec3::Zero());
  for (std::size_t n = 0; n < mesh_.node_count(); ++n) {
    Vec3 sum = Vec3::Zero();
    for (std::size_t k = gather_offset_[n]; k < gather_offset_[n + 1]; ++k) {
      const std::size_t slot = gather_slot_[k];
      sum += element_force[slot / 8][slot % 8];
    }
    out.nodal[n] = sum;
  }
  for (std::size_t e = 0; e < ne; ++e) {
    out.internal_energy += energy[e];
    out.hourglass_energy += hourglass[e];
  }
  return out;
}

double ExplicitModel::current_stable_time_step(std::span<const Vec3> positions,
                                               const InternalForces& forces) const {
  // Flanagan-Belytschko bound for the one-point hex: omega^2 <= 8 c^2 sum_a |dN_a/dx|^2.
  const double rho = cfg_.density * cfg_.mass_scaling;
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh_.element_count(); ++e) {
    const auto& conn = mesh_.element(e);
    ElementCoords x;
    for (int a = 0; a < 8; ++a) x[a] = positions[conn[a]];
    const Mat3 f = centroid_deformation_gradient(reference_[e], x);
    if (!(f.determinant() > 0.0)) throw InvalidState("degenerate element in time-step estimate");
    const Mat3 finv_t = f.inverse().transpose();
    double grad_sq = 0.0;
    for (int a = 0; a < 8; ++a) grad_sq += (finv_t * reference_[e].gradients[a]).squaredNorm();
    const double c = std::sqrt(forces.wave_modulus[e] / rho);
    dt = std::min(dt, 1.0 / (c * std::sqrt(2.0 * grad_sq)));
  }
  return cfg_.dt_safety * dt;
}

void advance(SimulationState& state, const InternalForces& forces, const DofConstraints& constraints,
             std::span<const Vec3> reference, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
  const std::size_t nn = state.positions.size();
  if (forces.nodal.size() != nn || reference.size() != nn || constraints.node_count() != nn) {
    throw InvalidArgument("advance: inconsistent node counts");
  }
  const double dt_avg = 0.5 * (state.previous_dt + dt);
  const double t_next = state.time + dt;
  double power = 0.0;
  double kinetic = 0.0;

  for (std::size_t n = 0; n < nn; ++n) {
    const double m = state.lumped_mass[n];
    for (int c = 0; c < 3; ++c) {
      const double f_int = forces.nodal[n][c];
      if (!std::isfinite(f_int)) {
        throw DivergenceError(state.time, "non-finite force at node " + std::to_string(n + 1));
      }
      const double v_old = state.velocities[n][c];
      double v_new;
      double x_new;
      double a;
      if (constraints.constrained(n, c)) {
        x_new = reference[n][c] + constraints.displacement(n, c, t_next);
        v_new = (x_new - state.positions[n][c]) / dt;
        a = (v_new - v_old) / dt_avg;
        power += (f_int + m * a) * 0.5 * (v_old + v_new);
      } else {
        a = -f_int / m;
        v_new = v_old + dt_avg * a;
        x_new = state.positions[n][c] + dt * v_new;
      }
      if (!std::isfinite(x_new)) {
        throw DivergenceError(state.time, "non-finite position at node " + std::to_string(n + 1));
      }
      const double v_mid = 0.5 * (v_old + v_new);
      kinetic += 0.5 * m * v_mid * v_mid;
      state.accelerations[n][c] = a;
      state.velocities[n][c] = v_new;
      state.positions[n][c] = x_new;
    }
  }

  state.energies.internal = forces.internal_energy;
  state.energies.hourglass = forces.hourglass_energy;
  state.energies.kinetic = kinetic;
  state.energies.external_work += 0.5 * state.previous_dt * (state.previous_boundary_power + power);
  state.ledger_time = state.time;
  state.previous_boundary_power = power;
  state.previous_dt = dt;
  state.time = t_next;
}

double SolverResult::final_ke_ie() const {
  if (energies.empty() || !(energies.back().internal > 0.0)) return 0.0;
  return energies.back().kinetic / energies.back().internal;
}

double SolverResult::final_hg_ie() const {
  if (energies.empty() || !(energies.back().internal > 0.0)) return 0.0;
  return energies.back().hourglass / energies.back().internal;
}

namespace {

// Elements flattened this far are treated as crushed.
constexpr double kMinStepFraction = 1e-3;

}  // namespace

SolverResult run_simulation(const HexMesh& mesh, std::span<const BoundaryCondition> bcs,
                            const SimConfig& cfg, const OgdenParams& p, const RunOptions& options) {
  cfg.validate();
  if (bcs.empty()) throw InvalidArgument("simulation requires at least one boundary condition");
  const ExplicitModel model(mesh, p, cfg, bcs);

  std::vector<std::string> tracked = options.tracked_sets;
  if (tracked.empty()) {
    for (const auto& bc : bcs)
      if (std::find(tracked.begin(), tracked.end(), bc.node_set) == tracked.end()) tracked.push_back(bc.node_set);
  }
  for (const auto& name : tracked) (void)mesh.node_set(name);

  const BoundaryCondition* driver = nullptr;
  for (const auto& bc : bcs) {
    if (bc.kind != BcKind::prescribed_axial) continue;
    if (!driver || std::abs(bc.total_displacement) > std::abs(driver->total_displacement)) driver = &bc;
  }

  const double interval = cfg.output_interval / cfg.rate_scaling;
  const double ramp = model.constraints().ramp_end();
  const auto n_out = static_cast<std::size_t>(std::max(1.0, std::ceil(ramp / interval - 1e-9)));

  SolverResult result;
  result.axis = options.axis;
  result.rate_scaling = cfg.rate_scaling;
  result.ramp_duration = ramp;
  result.energy_floor = 1e-6 * p.mu() * mesh.volume();
  result.min_dt = std::numeric_limits<double>::infinity();
  for (const auto& name : tracked) result.reactions[name].reserve(n_out + 1);

  const auto& reference = model.reference_positions();
  SimulationState state = model.initial_state();
  const int axis = component(options.axis);
  double dt_reference = 0.0;

  for (std::size_t k = 0; k <= n_out; ++k) {
    const double t_k = static_cast<double>(k) * interval;
    state.time = t_k;
    InternalForces forces = model.internal_forces(state.positions, t_k);

    double dt_stable = options.fixed_dt > 0.0 ? options.fixed_dt
                                              : model.current_stable_time_step(state.positions, forces);
    if (k == 0) dt_reference = dt_stable;
    if (!(dt_stable >= kMinStepFraction * dt_reference)) {
      throw DivergenceError(t_k, "stable time step collapsed to " + std::to_string(dt_stable / dt_reference) +
                                     " of its initial value");
    }
    const double substeps = std::ceil(interval / dt_stable - 1e-12);
    const auto m = static_cast<std::size_t>(std::max(1.0, substeps));
    const double dt = interval / static_cast<double>(m);
    if (k == 0) result.initial_dt = dt;
    result.min_dt = std::min(result.min_dt, dt);
    if (k == n_out) result.final_positions = state.positions;

    advance(state, forces, model.constraints(), reference, dt);
    ++result.steps;

    result.time.push_back(t_k);
    result.displacement.push_back(
        driver ? driver->total_displacement * smooth_step(t_k / driver->ramp_duration) : 0.0);
    for (const auto& name : tracked) {
      double sum = 0.0;
      for (std::size_t n : mesh.node_set(name)) sum += forces.nodal[n][axis];
      result.reactions[name].push_back(-sum);
    }
    result.energies.push_back(state.energies);
    const double err = state.energies.balance_error(result.energy_floor);
    result.max_balance_error = std::max(result.max_balance_error, err);
    if (options.enforce_energy_balance && !(err <= 0.02)) {
      throw DivergenceError(t_k, "energy balance violated (relative error " + std::to_string(err) + ")");
    }
    if (k == n_out) break;

    for (std::size_t i = 1; i < m; ++i) {
      forces = model.internal_forces(state.positions, state.time);
      advance(state, forces, model.constraints(), reference, dt);
      ++result.steps;
    }
  }
  return result;
}

const std::vector<double>& reaction_force(const SolverResult& result, const std::string& node_set) {
  auto it = result.reactions.find(node_set);
  if (it == result.reactions.end()) {
    throw InvalidArgument("node set '" + node_set + "' was not tracked during the run");
  }
  return it->second;
}

void write_result_csv(const SolverResult& result, const std::string& node_set, std::ostream& out) {
  const auto& force = reaction_force(result, node_set);
  out << "time_s,displacement_m,force_N,internal_J,kinetic_J,hourglass_J,external_work_J\n";
  for (std::size_t i = 0; i < result.time.size(); ++i) {
    const auto& e = result.energies[i];
    out << detail::format_double(result.time[i] * result.rate_scaling) << ','
        << detail::format_double(result.displacement[i]) << ',' << detail::format_double(force[i]) << ','
        << detail::format_double(e.internal) << ',' << detail::format_double(e.kinetic) << ','
        << detail::format_double(e.hourglass) << ',' << detail::format_double(e.external_work) << '\n';
  }
}

}  // namespace tissuefit
