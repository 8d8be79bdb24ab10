#pragma once

#include "tissuefit/mesh.hpp"

#include <array>

namespace tissuefit::detail {

// Natural coordinates of the eight corners.
inline constexpr std::array<std::array<double, 3>, 8> kCornerSigns{{
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1},
}};

// Edge neighbours of each corner, ordered so the triple is right-handed.
inline constexpr std::array<std::array<int, 3>, 8> kCornerEdges{{
    {1, 3, 4}, {2, 0, 5}, {3, 1, 6}, {0, 2, 7},
    {7, 5, 0}, {4, 6, 1}, {5, 7, 2}, {6, 4, 3},
}};

/// dN_a/dxi at natural point (xi, eta, zeta).
inline std::array<Vec3, 8> natural_gradients(double xi, double eta, double zeta) {
  std::array<Vec3, 8> g;
  for (int a = 0; a < 8; ++a) {
    const auto& s = kCornerSigns[a];
    const double fx = 1.0 + s[0] * xi;
    const double fy = 1.0 + s[1] * eta;
    const double fz = 1.0 + s[2] * zeta;
    g[a] = Vec3(s[0] * fy * fz, s[1] * fx * fz, s[2] * fx * fy) / 8.0;
  }
  return g;
}

/// J_ij = dx_i/dxi_j.
inline Mat3 natural_jacobian(const ElementCoords& x, const std::array<Vec3, 8>& dn) {
  Mat3 j = Mat3::Zero();
  for (int a = 0; a < 8; ++a) j += x[a] * dn[a].transpose();
  return j;
}

}  // namespace tissuefit::detail
