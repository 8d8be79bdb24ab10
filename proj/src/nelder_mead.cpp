#include "tissuefit/nelder_mead.hpp"

#include "tissuefit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tissuefit {

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const std::vector<double>& steps,
                             const NelderMeadSettings& settings) {
  const std::size_t n = x0.size();
  if (n == 0 || steps.size() != n) throw InvalidArgument("nelder_mead: step vector must match x0");

  NelderMeadResult result;
  const auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += steps[i];
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  const auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s(n + 1);
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s[i] = std::move(simplex[order[i]]);
      v[i] = values[order[i]];
    }
    simplex = std::move(s);
    values = std::move(v);
  };

  const auto point = [&](const std::vector<double>& centroid, double coeff) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = centroid[i] + coeff * (simplex[n][i] - centroid[i]);
    return x;
  };

  sort_simplex();
  while (true) {
    double size = 0.0;
    for (std::size_t v = 1; v <= n; ++v)
      for (std::size_t i = 0; i < n; ++i) size = std::max(size, std::abs(simplex[v][i] - simplex[0][i]));
    const double spread = values[n] - values[0];
    if (size <= settings.x_tolerance && spread <= settings.f_tolerance) {
      result.converged = true;
      break;
    }
    if (result.iterations >= settings.max_iterations) break;
    ++result.iterations;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v][i] / static_cast<double>(n);

    const auto xr = point(centroid, -settings.reflection);
    const double fr = eval(xr);
    if (fr < values[0]) {
      const auto xe = point(centroid, -settings.reflection * settings.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        values[n] = fe;
      } else {
        simplex[n] = xr;
        values[n] = fr;
      }
    } else if (fr < values[n - 1]) {
      simplex[n] = xr;
      values[n] = fr;
    } else {
      const bool outside = fr < values[n];
      const auto xc = outside ? point(centroid, -settings.reflection * settings.contraction)
                              : point(centroid, settings.contraction);
      const double fc = eval(xc);
      if (fc < (outside ? fr : values[n])) {
        simplex[n] = xc;
        values[n] = fc;
      } else {
        for (std::size_t v = 1; v <= n; ++v) {
          for (std::size_t i = 0; i < n; ++i)
            simplex[v][i] = simplex[0][i] + settings.shrink * (simplex[v][i] - simplex[0][i]);
          values[v] = eval(simplex[v]);
        }
      }
    }
    sort_simplex();
  }

  result.x = simplex[0];
  result.f = values[0];
  return result;
}

}  // namespace tissuefit
