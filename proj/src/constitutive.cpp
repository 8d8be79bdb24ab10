#include "tissuefit/constitutive.hpp"

#include "tissuefit/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace tissuefit {

VolumetricConstants derive_volumetric_constants(double mu, double nu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("shear modulus must be positive");
  if (!(nu >= 0.0) || !(nu < 0.5)) {
    throw InvalidArgument("Poisson's ratio must lie in [0, 0.5), got " + std::to_string(nu));
  }
  const double ratio = (2.0 + 2.0 * nu) / (3.0 - 6.0 * nu);
  const double k = ratio * mu;
  return {k, 2.0 / k};
}

double poisson_ratio(double bulk_modulus, double mu) {
  const double r = bulk_modulus / mu;
  return (3.0 * r - 2.0) / (6.0 * r + 2.0);
}

OgdenParams::OgdenParams(double mu, double alpha, double nu) : mu_(mu), alpha_(alpha), nu_(nu) {
  if (!std::isfinite(alpha) || alpha == 0.0) throw InvalidArgument("Ogden exponent alpha must be non-zero");
  const auto vc = derive_volumetric_constants(mu, nu);
  bulk_ = vc.bulk_modulus;
  compressibility_ = vc.compressibility;
}

DeformationGradient::DeformationGradient(const Mat3& f) : f_(f), det_(f.determinant()) {
  if (!(det_ > 0.0)) {
    throw InvalidState("deformation gradient has det(F) = " + std::to_string(det_) + " <= 0");
  }
}

namespace {

struct Spectral {
  Eigen::Vector3d stretch;  // lambda_i
  Mat3 directions;          // columns: eigenvectors of F F^T
};

Spectral spectral(const Mat3& f) {
  const Mat3 b = f * f.transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(b);
  Spectral s;
  for (int i = 0; i < 3; ++i) s.stretch[i] = std::sqrt(std::max(es.eigenvalues()[i], 0.0));
  s.directions = es.eigenvectors();
  return s;
}

}  // namespace

std::array<double, 3> principal_stretches(const DeformationGradient& f) {
  const auto s = spectral(f.matrix());
  return {s.stretch[0], s.stretch[1], s.stretch[2]};
}

double isochoric_energy(const DeformationGradient& f, const OgdenParams& p) {
  const auto s = spectral(f.matrix());
  const double jm13 = std::cbrt(1.0 / f.det());
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += std::pow(jm13 * s.stretch[i], p.alpha());
  return 2.0 * p.mu() / (p.alpha() * p.alpha()) * (sum - 3.0);
}

double strain_energy(const DeformationGradient& f, const OgdenParams& p) {
  const double dj = f.det() - 1.0;
  return isochoric_energy(f, p) + dj * dj / p.compressibility();
}

StressResult cauchy_stress(const DeformationGradient& f, const OgdenParams& p) {
  const auto s = spectral(f.matrix());
  const double j = f.det();
  const double jm13 = std::cbrt(1.0 / j);
  const double a = p.alpha();

  Eigen::Vector3d powed;
  for (int i = 0; i < 3; ++i) powed[i] = std::pow(jm13 * s.stretch[i], a);
  const double mean = powed.sum() / 3.0;

  StressResult r;
  r.pressure = 2.0 / p.compressibility() * (j - 1.0);
  const double dev_scale = 2.0 * p.mu() / (a * j);
  // Eigenprojections carry the structure, so equal stretches need no special case.
  for (int i = 0; i < 3; ++i) {
    const double sigma_i = dev_scale * (powed[i] - mean) + r.pressure;
    const Eigen::Vector3d n = s.directions.col(i);
    r.cauchy += sigma_i * (n * n.transpose());
  }
  for (int i = 0; i < 3; ++i) r.stretches[i] = s.stretch[i];
  r.cauchy = 0.5 * (r.cauchy + r.cauchy.transpose()).eval();
  r.energy_density = 2.0 * p.mu() / (a * a) * (powed.sum() - 3.0) +
                     (j - 1.0) * (j - 1.0) / p.compressibility();
  return r;
}

double uniaxial_nominal_stress(double stretch, double mu, double alpha) {
  if (!(stretch > 0.0) || !std::isfinite(stretch)) {
    throw InvalidArgument("stretch must be positive, got " + std::to_string(stretch));
  }
  if (!std::isfinite(alpha) || alpha == 0.0) throw InvalidArgument("Ogden exponent alpha must be non-zero");
  return 2.0 * mu / alpha * (std::pow(stretch, alpha - 1.0) - std::pow(stretch, -0.5 * alpha - 1.0));
}

double effective_shear_modulus(const std::array<double, 3>& stretches, const OgdenParams& p) {
  const double j = stretches[0] * stretches[1] * stretches[2];
  const double jm13 = std::cbrt(1.0 / j);
  double m = 1.0;
  for (double l : stretches) m = std::max(m, std::pow(jm13 * l, p.alpha()));
  return p.mu() * m;
}

}  // namespace tissuefit
