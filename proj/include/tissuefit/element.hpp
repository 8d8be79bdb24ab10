#pragma once

#include "tissuefit/constitutive.hpp"
#include "tissuefit/mesh.hpp"

#include <array>

namespace tissuefit {

/// Reference-configuration data of a one-point hexahedron.
struct ReferenceElement {
  ElementCoords coords;
  std::array<Vec3, 8> gradients;  // dN_a/dX at the centroid
  double volume = 0.0;            // centroid-rule volume, 8 det(dX/dxi)
  /// Hourglass base vectors, orthogonal to constant and linear nodal fields and
  /// normalised to unit length.
  std::array<std::array<double, 8>, 4> hourglass{};
  double hourglass_geometry = 0.0;  // volume * sum_a |dN_a/dX|^2, m
};

/// Throws InvalidState if the centroid Jacobian is not positive.
ReferenceElement make_reference_element(const ElementCoords& reference);

struct ElementForce {
  std::array<Vec3, 8> force;  // internal (resisting) nodal forces, N
  double energy_density = 0.0;  // J/m^3
  double energy = 0.0;          // J
  Mat3 deformation_gradient = Mat3::Identity();
  StressResult stress;
};

/// Centroid F = I + sum_a (x_a - X_a) dN_a/dX; exactly I for the reference coordinates.
Mat3 centroid_deformation_gradient(const ReferenceElement& ref, const ElementCoords& current);

/// Centroid-quadrature internal forces. Throws InvalidState when det F <= 0.
ElementForce element_internal_force(const ReferenceElement& ref, const ElementCoords& current,
                                    const OgdenParams& p);
ElementForce element_internal_force(const ElementCoords& reference, const ElementCoords& current,
                                    const OgdenParams& p);

struct HourglassForce {
  std::array<Vec3, 8> force;  // internal (resisting) nodal forces, N
  double energy = 0.0;          // stored hourglass energy relative to the reference state, J
  std::array<Vec3, 4> modes;  // modal amplitudes per hourglass vector and direction, m
};

/// Stiffness-type hourglass control acting on total displacement.
HourglassForce hourglass_force(const ReferenceElement& ref, const ElementCoords& current,
                               const OgdenParams& p, double coefficient);
HourglassForce hourglass_force(const ElementCoords& reference, const ElementCoords& current,
                               const OgdenParams& p, double coefficient);

}  // namespace tissuefit
