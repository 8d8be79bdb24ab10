#include "tissuefit/calibration.hpp"

#include "tissuefit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace tissuefit {

std::vector<double> resample_curve(const ForceDisplacementCurve& curve, std::span<const double> queries) {
  if (curve.empty()) throw InvalidArgument("cannot resample an empty curve");
  if (curve.displacement.size() != curve.force.size()) throw InvalidArgument("curve columns differ in length");

  std::vector<std::size_t> idx(curve.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return curve.displacement[a] < curve.displacement[b]; });
  std::vector<double> xs(curve.size());
  std::vector<double> fs(curve.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    xs[i] = curve.displacement[idx[i]];
    fs[i] = curve.force[idx[i]];
  }

  std::vector<double> out;
  out.reserve(queries.size());
  for (double q : queries) {
    if (!(q >= xs.front() && q <= xs.back())) {
      std::ostringstream msg;
      msg << "query displacement " << q << " m outside curve range [" << xs.front() << ", " << xs.back() << "]";
      throw InvalidArgument(msg.str());
    }
    const auto hi = std::upper_bound(xs.begin(), xs.end(), q);
    if (hi == xs.end()) {
      out.push_back(fs.back());
      continue;
    }
    const auto i = static_cast<std::size_t>(hi - xs.begin()) - 1;
    const double t = (q - xs[i]) / (xs[i + 1] - xs[i]);
    out.push_back(fs[i] + t * (fs[i + 1] - fs[i]));
  }
  return out;
}

ForceDisplacementCurve analytic_curve(const OgdenParams& p, double cross_section_area, double sample_height,
                                      std::span<const double> strains) {
  if (!(cross_section_area > 0.0)) throw InvalidArgument("cross-section area must be positive");
  if (!(sample_height > 0.0)) throw InvalidArgument("sample height must be positive");
  ForceDisplacementCurve c;
  c.displacement.reserve(strains.size());
  c.force.reserve(strains.size());
  for (double e : strains) {
    if (!(e > -1.0)) throw InvalidArgument("strain " + std::to_string(e) + " must exceed -1");
    c.displacement.push_back(e * sample_height);
    c.force.push_back(uniaxial_nominal_stress(1.0 + e, p.mu(), p.alpha()) * cross_section_area);
  }
  return c;
}

ForwardModel analytic_forward(double cross_section_area) {
  if (!(cross_section_area > 0.0)) throw InvalidArgument("cross-section area must be positive");
  return [cross_section_area](const OgdenParams& p, const ExperimentSpec& spec, std::span<const double> d) {
    std::vector<double> strains(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) strains[i] = nominal_strain(d[i], spec.sample_height);
    return analytic_curve(p, cross_section_area, spec.sample_height, strains).force;
  };
}

ForwardModel fe_forward(HexMesh mesh, SimConfig cfg) {
  cfg.validate();
  return [mesh = std::move(mesh), cfg](const OgdenParams& p, const ExperimentSpec& spec,
                                       std::span<const double> d) {
    ExperimentSpec run = spec;
    double extreme = 0.0;
    for (double x : d)
      if (std::abs(x) > std::abs(extreme)) extreme = x;
    run.target_displacement = extreme;
    const auto result = run_experiment(run, mesh, p, cfg);
    return resample_curve(result.curve, d);
  };
}

void CalibrationProblem::validate() const {
  if (curves.empty()) throw InvalidArgument("calibration needs at least one curve");
  if (!forward) throw InvalidArgument("calibration needs a forward model");
  if (!(strain_min < strain_max)) throw InvalidArgument("strain window lower bound must be below upper bound");
  bool tension = false;
  bool compression = false;
  for (const auto& c : curves) {
    (c.spec.kind == TestKind::tension ? tension : compression) = true;
    c.curve.validate();
    if (c.curve.empty()) throw InvalidArgument("calibration curve has no samples");
  }
  if (tension && compression && !(strain_min < 0.0 && strain_max > 0.0)) {
    throw InvalidArgument("strain window must straddle zero when both test kinds are fitted");
  }
  if (points_per_curve < 2) throw InvalidArgument("points_per_curve must be >= 2");
  if (!bounds.contains(initial_mu, initial_alpha)) {
    throw InvalidArgument("initial guess lies outside the parameter bounds");
  }
  if (settings.restarts < 1) throw InvalidArgument("restarts must be >= 1");
  (void)derive_volumetric_constants(initial_mu, nu);
}

std::vector<double> query_displacements(const CurveData& data, double strain_min, double strain_max,
                                        int points) {
  const double h = data.spec.sample_height;
  const auto [lo_it, hi_it] = std::minmax_element(data.curve.displacement.begin(), data.curve.displacement.end());
  const double lo = std::max(nominal_strain(*lo_it, h), strain_min);
  const double hi = std::min(nominal_strain(*hi_it, h), strain_max);
  if (!(hi > lo)) {
    throw InvalidArgument(std::string(to_string(data.spec.kind)) + " curve has no samples inside the strain window");
  }
  std::vector<double> d(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double s = k + 1 == points ? hi : lo + (hi - lo) * k / (points - 1);
    d[static_cast<std::size_t>(k)] = std::clamp(s * h, *lo_it, *hi_it);
  }
  return d;
}

namespace {

double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0);
}

double bounds_distance(double mu, double alpha, const ParameterBounds& b) {
  double d = 0.0;
  d += std::max(0.0, std::log(b.mu_min) - std::log(mu)) + std::max(0.0, std::log(mu) - std::log(b.mu_max));
  d += std::max(0.0, b.alpha_min - alpha) + std::max(0.0, alpha - b.alpha_max);
  d += std::max(0.0, b.alpha_exclusion - std::abs(alpha));
  return d;
}

}  // namespace

double objective(double mu, double alpha, const CalibrationProblem& problem, ObjectiveDetail* detail) {
  ObjectiveDetail local;
  ObjectiveDetail& info = detail ? *detail : local;
  info = {};
  if (!std::isfinite(mu) || !std::isfinite(alpha) || !problem.bounds.contains(mu, alpha)) {
    info.out_of_bounds = true;
    const double dist = std::isfinite(mu) && std::isfinite(alpha) ? bounds_distance(mu, alpha, problem.bounds) : 1.0;
    return kDivergencePenalty * (1.0 + dist);
  }

  const OgdenParams params(mu, alpha, problem.nu);
  std::vector<double> squares;
  for (const auto& data : problem.curves) {
    const auto q = query_displacements(data, problem.strain_min, problem.strain_max, problem.points_per_curve);
    const auto measured = resample_curve(data.curve, q);
    std::vector<double> model;
    try {
      model = problem.forward(params, data.spec, q);
    } catch (const DivergenceError& e) {
      info.forward_failed = true;
      info.diagnostic = e.what();
    } catch (const InvalidState& e) {
      info.forward_failed = true;
      info.diagnostic = e.what();
    }
    if (info.forward_failed) return kDivergencePenalty;
    if (model.size() != q.size()) throw InvalidArgument("forward model returned the wrong number of forces");

    CurveResidual res;
    std::vector<double> local_sq;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double r = model[i] - measured[i];
      if (!std::isfinite(r)) {
        info.forward_failed = true;
        info.diagnostic = "non-finite model force";
        return kDivergencePenalty;
      }
      local_sq.push_back(r * r);
      res.max_abs = std::max(res.max_abs, std::abs(r));
    }
    res.points = q.size();
    res.rms = std::sqrt(sorted_sum(local_sq) / static_cast<double>(q.size()));
    info.per_curve.push_back(res);
    squares.insert(squares.end(), local_sq.begin(), local_sq.end());
  }
  return std::sqrt(sorted_sum(squares) / static_cast<double>(squares.size()));
}

CalibrationResult calibrate(const CalibrationProblem& problem) {
  problem.validate();
  const auto& settings = problem.settings;

  struct Visit {
    double mu, alpha, f;
  };
  std::vector<Visit> visits;
  const Objective f = [&](std::span<const double> x) {
    const double mu = std::exp(x[0]);
    const double v = objective(mu, x[1], problem);
    visits.push_back({mu, x[1], v});
    return v;
  };

  CalibrationResult result;
  result.initial_objective = objective(problem.initial_mu, problem.initial_alpha, problem);

  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sign = problem.initial_alpha < 0.0 ? -1.0 : 1.0;
  const auto& b = problem.bounds;

  int best = -1;
  NelderMeadResult best_run;
  for (int r = 0; r < settings.restarts; ++r) {
    double log_mu = std::log(problem.initial_mu);
    double alpha = problem.initial_alpha;
    if (r > 0) {
      do {
        log_mu = std::log(problem.initial_mu) + (2.0 * unit(rng) - 1.0);
        alpha = problem.initial_alpha + 4.0 * (2.0 * unit(rng) - 1.0);
      } while (!b.contains(std::exp(log_mu), alpha) || alpha * sign <= 0.0);
    }
    const std::vector<double> steps{0.2, std::max(0.5, 0.1 * std::abs(alpha))};
    const auto run = nelder_mead(f, {log_mu, alpha}, steps, settings.optimizer);
    result.iterations += run.iterations;
    result.evaluations += run.evaluations;
    result.restarts.push_back({std::exp(run.x[0]), run.x[1], run.f, run.iterations, run.converged});
    if (best < 0 || run.f < best_run.f) {
      best = r;
      best_run = run;
    }
  }

  if (!(best_run.f < kDivergencePenalty)) {
    std::ostringstream msg;
    msg << "no feasible forward run among " << visits.size() << " trial points; last trials:";
    const std::size_t from = visits.size() > 5 ? visits.size() - 5 : 0;
    for (std::size_t i = from; i < visits.size(); ++i) {
      msg << " (mu=" << visits[i].mu << ", alpha=" << visits[i].alpha << ", f=" << visits[i].f << ")";
    }
    throw NonConvergence(msg.str());
  }

  double mu = std::exp(best_run.x[0]);
  double alpha = best_run.x[1];
  if (best_run.f > result.initial_objective) {
    mu = problem.initial_mu;
    alpha = problem.initial_alpha;
  }
  result.params = OgdenParams(mu, alpha, problem.nu);
  ObjectiveDetail detail;
  result.objective = objective(mu, alpha, problem, &detail);
  result.per_curve = detail.per_curve;
  result.converged = best_run.converged;

  double force_scale = 0.0;
  for (const auto& c : problem.curves)
    for (double v : c.curve.force) force_scale = std::max(force_scale, std::abs(v));
  const double band = result.objective * (1.0 + settings.band_relative) + settings.band_absolute_fraction * force_scale;
  double mu_lo = mu, mu_hi = mu, a_lo = alpha, a_hi = alpha;
  for (const auto& v : visits) {
    if (v.f > band) continue;
    mu_lo = std::min(mu_lo, v.mu);
    mu_hi = std::max(mu_hi, v.mu);
    a_lo = std::min(a_lo, v.alpha);
    a_hi = std::max(a_hi, v.alpha);
  }
  result.mu_spread = (mu_hi - mu_lo) / mu;
  result.alpha_spread = a_hi - a_lo;
  result.ill_conditioned =
      result.mu_spread > settings.mu_spread_limit || result.alpha_spread > settings.alpha_spread_limit;
  return result;
}

CurveComparison compare_curves(const ForceDisplacementCurve& a, const ForceDisplacementCurve& b,
                               double window_lower, double window_upper) {
  if (a.empty() || b.empty()) throw InvalidArgument("cannot compare an empty curve");
  const auto [a_lo, a_hi] = std::minmax_element(a.displacement.begin(), a.displacement.end());
  const auto [b_lo, b_hi] = std::minmax_element(b.displacement.begin(), b.displacement.end());
  CurveComparison out;
  out.lower = std::max({*a_lo, *b_lo, window_lower});
  out.upper = std::min({*a_hi, *b_hi, window_upper});
  if (!(out.lower <= out.upper)) throw InvalidArgument("curves share no displacement range inside the window");

  std::vector<double> q;
  for (const auto* c : {&a, &b})
    for (double d : c->displacement)
      if (d >= out.lower && d <= out.upper) q.push_back(d);
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  if (q.empty()) q.push_back(out.lower);

  const auto fa = resample_curve(a, q);
  const auto fb = resample_curve(b, q);
  std::vector<double> squares(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double diff = std::abs(fb[i] - fa[i]);
    squares[i] = diff * diff;
    out.max_abs = std::max(out.max_abs, diff);
    if (fa[i] != 0.0) out.max_relative = std::max(out.max_relative, 100.0 * diff / std::abs(fa[i]));
  }
  out.points = q.size();
  out.rms = std::sqrt(sorted_sum(squares) / static_cast<double>(q.size()));
  return out;
}

}  // namespace tissuefit
