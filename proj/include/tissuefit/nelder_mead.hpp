#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tissuefit {

struct NelderMeadSettings {
  int max_iterations = 500;
  double x_tolerance = 1e-6;  // max vertex distance from the best vertex (infinity norm)
  double f_tolerance = 1e-10; // max objective spread over the simplex
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;  // both tolerances met before the iteration cap
};

using Objective = std::function<double(std::span<const double>)>;

/// Downhill simplex minimisation starting from x0 with an axis-aligned initial
/// simplex of the given step sizes. Deterministic: ties keep vertex order.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const std::vector<double>& steps,
                             const NelderMeadSettings& settings = {});

}  // namespace tissuefit
