#pragma once

#include "tissuefit/constitutive.hpp"
#include "tissuefit/dynamics.hpp"
#include "tissuefit/nelder_mead.hpp"
#include "tissuefit/scenario.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace tissuefit {

/// Objective value returned for failed forward runs and out-of-bounds trial points, N.
inline constexpr double kDivergencePenalty = 1e3;

/// Piecewise-linear interpolation; queries outside the sampled range throw InvalidArgument.
std::vector<double> resample_curve(const ForceDisplacementCurve& curve, std::span<const double> queries);

/// Incompressible closed-form curve: force = P(1 + strain) * area, displacement = strain * height.
ForceDisplacementCurve analytic_curve(const OgdenParams& p, double cross_section_area, double sample_height,
                                      std::span<const double> strains);

/// Model forces at the given head displacements for one experiment.
using ForwardModel = std::function<std::vector<double>(const OgdenParams&, const ExperimentSpec&,
                                                       std::span<const double> displacements)>;

ForwardModel analytic_forward(double cross_section_area);
/// Runs run_experiment on the mesh; the experiment is driven to the largest query.
ForwardModel fe_forward(HexMesh mesh, SimConfig cfg);

struct CurveData {
  ForceDisplacementCurve curve;
  ExperimentSpec spec;
};

struct ParameterBounds {
  double mu_min = 10.0;
  double mu_max = 1e5;
  double alpha_min = -20.0;
  double alpha_max = 20.0;
  double alpha_exclusion = 0.1;  // |alpha| below this is rejected

  bool contains(double mu, double alpha) const noexcept {
    return mu >= mu_min && mu <= mu_max && alpha >= alpha_min && alpha <= alpha_max &&
           std::abs(alpha) >= alpha_exclusion;
  }
};

struct CalibrationSettings {
  NelderMeadSettings optimizer{400, 1e-7, 1e-9};
  int restarts = 3;
  std::uint64_t seed = 1;
  /// Near-optimal band for the spread diagnostic: objective <= best * (1 + relative)
  /// + absolute_fraction * max |data force|.
  double band_relative = 0.01;
  double band_absolute_fraction = 1e-3;
  double mu_spread_limit = 0.05;    // relative
  double alpha_spread_limit = 0.5;  // absolute
};

struct CalibrationProblem {
  std::vector<CurveData> curves;
  double strain_min = -0.3;
  double strain_max = 0.2;
  int points_per_curve = 25;
  ForwardModel forward;
  double nu = kDefaultPoissonRatio;
  double initial_mu = 500.0;
  double initial_alpha = -2.0;
  ParameterBounds bounds;
  CalibrationSettings settings;

  void validate() const;
};

/// Head displacements of the uniform strain grid used for one curve.
std::vector<double> query_displacements(const CurveData& data, double strain_min, double strain_max,
                                        int points);

struct CurveResidual {
  double rms = 0.0;      // N
  double max_abs = 0.0;  // N
  std::size_t points = 0;
};

struct ObjectiveDetail {
  std::vector<CurveResidual> per_curve;
  bool forward_failed = false;
  bool out_of_bounds = false;
  std::string diagnostic;
};

/// Pooled RMS force error over every curve's strain grid, N.
double objective(double mu, double alpha, const CalibrationProblem& problem, ObjectiveDetail* detail = nullptr);

struct RestartOutcome {
  double mu = 0.0;
  double alpha = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct CalibrationResult {
  OgdenParams params{1.0, 1.0};
  double objective = 0.0;          // N
  double initial_objective = 0.0;  // N, at the initial guess
  int iterations = 0;              // summed over restarts
  int evaluations = 0;
  bool converged = false;          // restart that produced `params` met its tolerances
  std::vector<CurveResidual> per_curve;
  std::vector<RestartOutcome> restarts;
  double mu_spread = 0.0;
  double alpha_spread = 0.0;
  bool ill_conditioned = false;
};

struct CurveComparison {
  double max_abs = 0.0;       // N
  double max_relative = 0.0;  // percent of |a|, over points where a != 0
  double rms = 0.0;           // N
  std::size_t points = 0;
  double lower = 0.0;         // compared displacement range, m
  double upper = 0.0;
};

/// Differences b - a over the union of both sample sets inside the common
/// displacement range clipped to [window_lower, window_upper]. Disjoint ranges throw.
CurveComparison compare_curves(const ForceDisplacementCurve& a, const ForceDisplacementCurve& b,
                               double window_lower = -std::numeric_limits<double>::infinity(),
                               double window_upper = std::numeric_limits<double>::infinity());

/// Multi-start Nelder-Mead over (ln mu, alpha). Throws NonConvergence when no
/// trial point produced a usable forward run.
CalibrationResult calibrate(const CalibrationProblem& problem);

}  // namespace tissuefit
