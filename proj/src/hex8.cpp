#include "hex_shape.hpp"
#include "tissuefit/element.hpp"
#include "tissuefit/errors.hpp"


#include <cmath>

namespace tissuefit {

ReferenceElement make_reference_element(const ElementCoords& reference) {
  ReferenceElement ref;
  ref.coords = reference;
  const auto dn = detail::natural_gradients(0.0, 0.0, 0.0);
  const Mat3 jac = detail::natural_jacobian(reference, dn);
  const double det = jac.determinant();
  if (!(det > 0.0)) {
    throw InvalidState("reference element has non-positive centroid Jacobian " + std::to_string(det));
  }
  ref.volume = 8.0 * det;
  const Mat3 jinv_t = jac.inverse().transpose();
  double grad_sq = 0.0;
  for (int a = 0; a < 8; ++a) {
    ref.gradients[a] = jinv_t * dn[a];
    grad_sq += ref.gradients[a].squaredNorm();
  }
  ref.hourglass_geometry = ref.volume * grad_sq;

  const double norm = 1.0 / std::sqrt(8.0);
  for (int m = 0; m < 4; ++m) {
    std::array<double, 8> h;
    for (int a = 0; a < 8; ++a) {
      const auto& s = detail::kCornerSigns[a];
      switch (m) {
        case 0: h[a] = s[1] * s[2]; break;
        case 1: h[a] = s[0] * s[2]; break;
        case 2: h[a] = s[0] * s[1]; break;
        default: h[a] = s[0] * s[1] * s[2]; break;
      }
    }
    // Remove the part reproduced by linear fields: gamma = h - sum_j (h . X_j) g_j.
    Vec3 hx = Vec3::Zero();
    for (int a = 0; a < 8; ++a) hx += h[a] * reference[a];
    for (int a = 0; a < 8; ++a) ref.hourglass[m][a] = norm * (h[a] - hx.dot(ref.gradients[a]));
  }
  return ref;
}

Mat3 centroid_deformation_gradient(const ReferenceElement& ref, const ElementCoords& current) {
  Mat3 f = Mat3::Identity();
  for (int a = 0; a < 8; ++a) f += (current[a] - ref.coords[a]) * ref.gradients[a].transpose();
  return f;
}

ElementForce element_internal_force(const ReferenceElement& ref, const ElementCoords& current,
                                    const OgdenParams& p) {
  ElementForce out;
  const Mat3 f = centroid_deformation_gradient(ref, current);
  out.deformation_gradient = f;

  const DeformationGradient def(f);
  out.stress = cauchy_stress(def, p);
  out.energy_density = out.stress.energy_density;
  out.energy = ref.volume * out.energy_density;

  // Current volume times Cauchy stress on current gradients equals V0 * P * dN/dX.
  const Mat3 nominal = def.det() * out.stress.cauchy * f.inverse().transpose();
  for (int a = 0; a < 8; ++a) out.force[a] = ref.volume * (nominal * ref.gradients[a]);
  return out;
}

ElementForce element_internal_force(const ElementCoords& reference, const ElementCoords& current,
                                    const OgdenParams& p) {
  return element_internal_force(make_reference_element(reference), current, p);
}

HourglassForce hourglass_force(const ReferenceElement& ref, const ElementCoords& current,
                               const OgdenParams& p, double coefficient) {
  HourglassForce out;
  out.force.fill(Vec3::Zero());
  out.modes.fill(Vec3::Zero());
  if (coefficient == 0.0) return out;
  const double stiffness = coefficient * p.mu() * ref.hourglass_geometry;
  for (int m = 0; m < 4; ++m) {
    Vec3 q = Vec3::Zero();
    for (int a = 0; a < 8; ++a) q += ref.hourglass[m][a] * (current[a] - ref.coords[a]);
    out.modes[m] = q;
    out.energy += 0.5 * stiffness * q.squaredNorm();
    for (int a = 0; a < 8; ++a) out.force[a] += stiffness * ref.hourglass[m][a] * q;
  }
  return out;
}

HourglassForce hourglass_force(const ElementCoords& reference, const ElementCoords& current,
                               const OgdenParams& p, double coefficient) {
  return hourglass_force(make_reference_element(reference), current, p, coefficient);
}

}  // namespace tissuefit
