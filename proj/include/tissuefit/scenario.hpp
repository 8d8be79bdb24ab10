#pragma once

#include "tissuefit/constitutive.hpp"
#include "tissuefit/dynamics.hpp"
#include "tissuefit/mesh.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tissuefit {

inline constexpr double kDefaultLoadingSpeed = 3e-4;  // 0.3 mm/s

enum class TestKind { tension, compression };
const char* to_string(TestKind k) noexcept;
TestKind parse_test_kind(const std::string& s);

/// How the loading and base surfaces are held laterally.
enum class LateralMode {
  bonded,  // glued base, loading head controls all three DOFs of its surface
  free,    // only axial DOFs prescribed on both faces; roller sets remove rigid modes
};
const char* to_string(LateralMode m) noexcept;
LateralMode parse_lateral_mode(const std::string& s);

struct RollerSet {
  std::string node_set;
  Axis axis;
};

struct ExperimentSpec {
  TestKind kind = TestKind::tension;
  double loading_speed = kDefaultLoadingSpeed;  // m/s
  double target_displacement = 0.0;             // m, > 0 tension, < 0 compression
  double sample_height = 0.0;                   // m
  std::string base_set = "bottom";
  std::string load_set = "top";
  std::string tracked_set;  // empty: base_set
  Axis axis = Axis::z;
  LateralMode lateral = LateralMode::bonded;
  std::vector<RollerSet> rollers;  // used in free mode

  const std::string& tracked() const noexcept { return tracked_set.empty() ? base_set : tracked_set; }
  /// Throws InvalidArgument; checks named sets against the mesh.
  void validate(const HexMesh& mesh) const;
};

/// Uniaxial test of a box-like sample with rollers on the xmin/ymin faces.
ExperimentSpec homogeneous_spec(TestKind kind, double target_displacement, double sample_height);

/// Sampled (displacement, force) pairs; positive = elongation / tension.
struct ForceDisplacementCurve {
  std::vector<double> displacement;  // m
  std::vector<double> force;         // N

  std::size_t size() const noexcept { return displacement.size(); }
  bool empty() const noexcept { return displacement.empty(); }
  /// Finite values, equal lengths, monotone displacements.
  void validate() const;
};

std::vector<BoundaryCondition> build_bcs(const ExperimentSpec& spec, const HexMesh& mesh,
                                         const SimConfig& cfg);

double nominal_strain(double displacement, double sample_height);

struct QuasiStaticCheck {
  bool pass = true;
  double ke_ie_ratio = 0.0;
};

/// Max kinetic/internal energy ratio over samples after 10% of the ramp.
QuasiStaticCheck quasistatic_check(const SolverResult& result, double threshold);

struct ExperimentResult {
  ForceDisplacementCurve curve;
  SolverResult solver;
  QuasiStaticCheck quasistatic;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const HexMesh& mesh, const OgdenParams& p,
                                const SimConfig& cfg);

// --- curve CSV -------------------------------------------------------------

/// `displacement_m,force_N` with optional leading `#` comment lines.
ForceDisplacementCurve parse_curve_csv(std::istream& in);
ForceDisplacementCurve read_curve_csv(const std::string& path);
void write_curve_csv(const ForceDisplacementCurve& curve, std::ostream& out,
                     const std::vector<std::string>& comments = {});
void write_curve_csv(const ForceDisplacementCurve& curve, const std::string& path,
                     const std::vector<std::string>& comments = {});

}  // namespace tissuefit
