#pragma once

#include "tissuefit/constitutive.hpp"
#include "tissuefit/element.hpp"
#include "tissuefit/mesh.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace tissuefit {

enum class Axis { x = 0, y = 1, z = 2 };

inline int component(Axis a) noexcept { return static_cast<int>(a); }
const char* to_string(Axis a) noexcept;
Axis parse_axis(const std::string& s);

struct SimConfig {
  double density = 1000.0;             // kg/m^3
  double dt_safety = 0.9;              // (0, 1]
  double hourglass_coefficient = 0.05; // >= 0
  double mass_scaling = 1.0;           // >= 1
  double rate_scaling = 1.0;           // >= 1, loading-speed multiplier
  double output_interval = 0.01;       // s of physical (unscaled) time
  double ke_ie_threshold = 0.05;

  /// Throws InvalidArgument naming the first field out of range.
  void validate() const;
};

enum class BcKind { fixed_all, fixed_lateral, prescribed_axial };

struct BoundaryCondition {
  BcKind kind = BcKind::fixed_all;
  std::string node_set;
  Axis axis = Axis::z;
  double total_displacement = 0.0;  // m, prescribed_axial only
  double ramp_duration = 1.0;       // s of simulated time, prescribed_axial only

  static BoundaryCondition fixed(std::string set);
  static BoundaryCondition lateral(std::string set, Axis axis = Axis::z);
  static BoundaryCondition axial(std::string set, Axis axis, double displacement, double ramp);
};

/// Quintic ramp xi^3 (10 - 15 xi + 6 xi^2); xi is clamped to [0, 1].
double smooth_step(double xi);

std::vector<double> lumped_masses(const HexMesh& mesh, double density, double mass_scaling = 1.0);

/// dt_safety * min_e (V_e / largest face area_e) / c with c = sqrt((K + 4mu/3) / (rho * mass_scaling)).
double stable_time_step(const HexMesh& mesh, const OgdenParams& p, const SimConfig& cfg);

/// Per-DOF kinematic constraints compiled from boundary conditions.
class DofConstraints {
 public:
  DofConstraints() = default;
  DofConstraints(const HexMesh& mesh, std::span<const BoundaryCondition> bcs);

  bool constrained(std::size_t node, int comp) const { return slot_[3 * node + comp] >= 0; }
  /// Prescribed displacement of a constrained DOF at time t (0 for fixed DOFs).
  double displacement(std::size_t node, int comp, double t) const;
  std::size_t node_count() const noexcept { return slot_.size() / 3; }
  std::size_t constrained_count() const noexcept { return prescriptions_.size(); }
  /// Longest ramp among prescribed DOFs (0 when everything is fixed).
  double ramp_end() const noexcept { return ramp_end_; }

 private:
  struct Prescription {
    double total;
    double ramp;
  };
  std::vector<int> slot_;
  std::vector<Prescription> prescriptions_;
  double ramp_end_ = 0.0;
};

struct EnergyLedger {
  double internal = 0.0;
  double kinetic = 0.0;
  double hourglass = 0.0;
  double external_work = 0.0;

  double imbalance() const noexcept { return external_work - (internal + kinetic + hourglass); }
  /// |imbalance| / max(external work, internal, floor).
  double balance_error(double floor) const noexcept;
};

/// Positions at `time`; velocities at time - dt/2. `energies` refers to
/// `ledger_time`, the instant of the last force evaluation.
struct SimulationState {
  double time = 0.0;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<Vec3> accelerations;
  std::vector<double> lumped_mass;
  EnergyLedger energies;
  double ledger_time = 0.0;
  double previous_dt = 0.0;
  double previous_boundary_power = 0.0;
};

struct InternalForces {
  std::vector<Vec3> nodal;            // resisting forces, N
  double internal_energy = 0.0;       // J
  double hourglass_energy = 0.0;      // J
  std::vector<double> wave_modulus;   // per element K + 4/3 mu_eff, Pa
};

/// Mesh, material and constraints prepared for repeated force evaluation.
class ExplicitModel {
 public:
  ExplicitModel(const HexMesh& mesh, const OgdenParams& p, const SimConfig& cfg,
                std::span<const BoundaryCondition> bcs);

  const HexMesh& mesh() const noexcept { return mesh_; }
  const DofConstraints& constraints() const noexcept { return constraints_; }
  const std::vector<Vec3>& reference_positions() const noexcept { return mesh_.nodes(); }

  SimulationState initial_state() const;
  /// Throws ElementInversion carrying the lowest failing element and `time`.
  InternalForces internal_forces(std::span<const Vec3> positions, double time) const;
  /// dt_safety * min_e 1 / (c_e sqrt(2 sum_a |dN_a/dx|^2)) on the current geometry with the
  /// moduli of the last evaluation. Bounds the element eigenfrequencies, so it is stricter
  /// than stable_time_step (by 1/sqrt(3) for a cube).
  double current_stable_time_step(std::span<const Vec3> positions,
                                  const InternalForces& forces) const;

 private:
  HexMesh mesh_;
  OgdenParams params_;
  SimConfig cfg_;
  DofConstraints constraints_;
  std::vector<ReferenceElement> reference_;
  std::vector<std::size_t> gather_offset_;  // CSR over nodes
  std::vector<std::size_t> gather_slot_;    // 8 * element + local corner
  int threads_ = 1;
};

/// Central-difference step from `state.time` to `state.time + dt`. Free DOFs move
/// under the resisting forces; constrained DOFs follow their prescription.
void advance(SimulationState& state, const InternalForces& forces, const DofConstraints& constraints,
             std::span<const Vec3> reference, double dt);

struct RunOptions {
  /// Node sets whose reactions are recorded. Empty: every set named by a BC.
  std::vector<std::string> tracked_sets;
  Axis axis = Axis::z;
  /// Overrides the automatic stable step (simulated seconds) when positive.
  double fixed_dt = 0.0;
  /// Throw DivergenceError when the energy balance is violated.
  bool enforce_energy_balance = true;
};

struct SolverResult {
  std::vector<double> time;          // simulated time, s
  std::vector<double> displacement;  // prescribed displacement of the driving BC, m
  std::map<std::string, std::vector<double>> reactions;  // N, along `axis`
  std::vector<EnergyLedger> energies;
  Axis axis = Axis::z;
  double rate_scaling = 1.0;
  double ramp_duration = 0.0;        // simulated time
  double energy_floor = 0.0;         // J, used by balance checks
  double initial_dt = 0.0;
  double min_dt = 0.0;
  std::size_t steps = 0;
  double max_balance_error = 0.0;
  std::vector<Vec3> final_positions;  // at the last sample

  double final_ke_ie() const;
  double final_hg_ie() const;
};

/// Runs the explicit time loop to the end of the longest ramp (at least one
/// output interval), sampling every cfg.output_interval / rate_scaling.
SolverResult run_simulation(const HexMesh& mesh, std::span<const BoundaryCondition> bcs,
                            const SimConfig& cfg, const OgdenParams& p, const RunOptions& options = {});

/// -sum of internal forces along the result axis over the set: tension-positive at a fixed base.
const std::vector<double>& reaction_force(const SolverResult& result, const std::string& node_set);

/// Columns: time_s (physical), displacement_m, force_N, internal_J, kinetic_J, hourglass_J, external_work_J.
void write_result_csv(const SolverResult& result, const std::string& node_set, std::ostream& out);

}  // namespace tissuefit
