#include "hex_shape.hpp"
#include "tissuefit/errors.hpp"
#include "tissuefit/mesh.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace tissuefit {

CornerJacobians scaled_jacobian(const ElementCoords& x) {
  double scale = 0.0;
  for (const auto& p : x) scale = std::max(scale, (p - x[0]).norm());
  const double tiny = 1e-14 * scale;

  CornerJacobians out;
  for (int a = 0; a < 8; ++a) {
    const auto& nb = detail::kCornerEdges[a];
    const Vec3 e1 = x[nb[0]] - x[a];
    const Vec3 e2 = x[nb[1]] - x[a];
    const Vec3 e3 = x[nb[2]] - x[a];
    const double l1 = e1.norm();
    const double l2 = e2.norm();
    const double l3 = e3.norm();
    if (l1 <= tiny || l2 <= tiny || l3 <= tiny) {
      out.corner[a] = 0.0;
      out.degenerate = true;
      continue;
    }
    out.corner[a] = e1.dot(e2.cross(e3)) / (l1 * l2 * l3);
  }
  out.mean = std::accumulate(out.corner.begin(), out.corner.end(), 0.0) / 8.0;
  return out;
}

CornerJacobians element_scaled_jacobian(const HexMesh& mesh, std::size_t element) {
  if (element >= mesh.element_count()) {
    throw InvalidArgument("element " + std::to_string(element + 1) + " does not exist");
  }
  return scaled_jacobian(mesh.element_coords(element));
}

QualityReport mesh_quality(const HexMesh& mesh) {
  if (mesh.empty()) throw InvalidArgument("mesh quality requested for an empty mesh");

  QualityReport r;
  r.node_count = mesh.node_count();
  r.element_count = mesh.element_count();
  r.per_element_mean_jacobian.resize(mesh.element_count());
  r.min_corner_jacobian = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const CornerJacobians sj = scaled_jacobian(mesh.element_coords(e));
    r.per_element_mean_jacobian[e] = sj.mean;
    const double lo = *std::min_element(sj.corner.begin(), sj.corner.end());
    r.min_corner_jacobian = std::min(r.min_corner_jacobian, lo);
    if (sj.degenerate || lo <= 0.0) r.flagged_elements.push_back(e);
  }
  // Summing in sorted order makes the mean independent of element numbering.
  std::vector<double> sorted = r.per_element_mean_jacobian;
  std::sort(sorted.begin(), sorted.end());
  r.mesh_mean_jacobian =
      std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  return r;
}

}  // namespace tissuefit
