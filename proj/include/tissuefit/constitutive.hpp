#pragma once

#include "tissuefit/mesh.hpp"

#include <array>

namespace tissuefit {

/// Poisson's ratio the tissue model uses unless told otherwise.
inline constexpr double kDefaultPoissonRatio = 0.49;

struct VolumetricConstants {
  double bulk_modulus;     // K, Pa
  double compressibility;  // D = 2/K, 1/Pa
};

/// K from (mu, nu) by inverting nu = (3K/mu - 2)/(6K/mu + 2), and D = 2/K.
VolumetricConstants derive_volumetric_constants(double mu, double nu);

/// nu implied by a bulk/shear modulus pair.
double poisson_ratio(double bulk_modulus, double mu);

/// First-order Ogden material. mu in Pa, alpha dimensionless, nu sets the
/// volumetric penalty through K and D.
class OgdenParams {
 public:
  OgdenParams(double mu, double alpha, double nu = kDefaultPoissonRatio);

  double mu() const noexcept { return mu_; }
  double alpha() const noexcept { return alpha_; }
  double nu() const noexcept { return nu_; }
  double bulk_modulus() const noexcept { return bulk_; }
  double compressibility() const noexcept { return compressibility_; }

 private:
  double mu_;
  double alpha_;
  double nu_;
  double bulk_;
  double compressibility_;
};

/// A deformation gradient; the constructor rejects det(F) <= 0 with InvalidState.
class DeformationGradient {
 public:
  explicit DeformationGradient(const Mat3& f);
  const Mat3& matrix() const noexcept { return f_; }
  double det() const noexcept { return det_; }

 private:
  Mat3 f_;
  double det_;
};

struct StressResult {
  Mat3 cauchy = Mat3::Zero();  // Pa
  double energy_density = 0.0; // J/m^3
  double pressure = 0.0;       // volumetric part (2/D)(J-1), Pa, tension positive
  std::array<double, 3> stretches{1.0, 1.0, 1.0};
};

/// Principal stretches (singular values of F), ascending.
std::array<double, 3> principal_stretches(const DeformationGradient& f);

/// W = (2mu/alpha^2)(sum lbar_i^alpha - 3) + (1/D)(J - 1)^2 with lbar_i = J^(-1/3) lambda_i.
double strain_energy(const DeformationGradient& f, const OgdenParams& p);
/// Isochoric part of W only.
double isochoric_energy(const DeformationGradient& f, const OgdenParams& p);

StressResult cauchy_stress(const DeformationGradient& f, const OgdenParams& p);

/// Nominal axial stress of an incompressible bar in uniaxial stress:
/// P = (2mu/alpha)(lambda^(alpha-1) - lambda^(-alpha/2-1)).
double uniaxial_nominal_stress(double stretch, double mu, double alpha);

/// Incremental shear stiffness mu * max_i lbar_i^alpha; used for wave-speed estimates.
double effective_shear_modulus(const std::array<double, 3>& stretches, const OgdenParams& p);

}  // namespace tissuefit
