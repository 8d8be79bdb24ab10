#pragma once

#include "tissuefit/calibration.hpp"
#include "tissuefit/constitutive.hpp"
#include "tissuefit/dynamics.hpp"
#include "tissuefit/mesh.hpp"
#include "tissuefit/scenario.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace tissuefit {

enum class LengthUnit { m, mm };
const char* to_string(LengthUnit u) noexcept;
LengthUnit parse_length_unit(const std::string& s);
/// Metres per unit.
double unit_scale(LengthUnit u) noexcept;

struct MeshSource {
  std::string path;  // resolved against the config directory; empty: box
  std::array<double, 3> lengths{0.0, 0.0, 0.0};  // m
  std::array<int, 3> divisions{1, 1, 1};
};

enum class ForwardKind { analytic, fe };
const char* to_string(ForwardKind k) noexcept;
ForwardKind parse_forward_kind(const std::string& s);

struct CalibrationConfig {
  double strain_min = -0.3;
  double strain_max = 0.2;
  int points_per_curve = 25;
  double initial_mu = 500.0;
  double initial_alpha = -2.0;
  int restarts = 3;
  std::uint64_t seed = 1;
  int max_iterations = 400;
  double x_tolerance = 1e-7;
  double f_tolerance = 1e-9;  // N
  ForwardKind forward = ForwardKind::analytic;
};

/// A simulation/calibration run. Lengths are held in metres; `units` records the
/// unit the source document used and is applied once when the document is read.
struct RunConfig {
  double mu = 1200.0;
  double alpha = -6.3;
  double nu = kDefaultPoissonRatio;
  SimConfig sim;
  ExperimentSpec experiment;
  MeshSource mesh;
  LengthUnit units = LengthUnit::m;
  CalibrationConfig calibration;

  OgdenParams params() const { return OgdenParams(mu, alpha, nu); }
  /// Throws InvalidArgument for out-of-range values or missing files.
  void validate() const;
};

/// `base_dir` resolves a relative mesh path. Unknown keys are rejected.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
/// Complete document in metres with every default filled in; parse_config of the
/// output reproduces the same RunConfig.
std::string config_to_json(const RunConfig& cfg);

HexMesh load_mesh(const RunConfig& cfg);
/// Sample height from the mesh extent along the experiment axis when not set.
ExperimentSpec resolved_experiment(const RunConfig& cfg, const HexMesh& mesh);
/// Section normal to the experiment axis, m^2.
double cross_section_area(const HexMesh& mesh, Axis axis);

}  // namespace tissuefit
