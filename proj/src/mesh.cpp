#include "tissuefit/mesh.hpp"

#include "hex_shape.hpp"
#include "tissuefit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tissuefit {

HexMesh::HexMesh(std::vector<Vec3> nodes, std::vector<HexConnectivity> elements,
                 IndexSets node_sets, IndexSets element_sets)
    : nodes_(std::move(nodes)),
      elements_(std::move(elements)),
      node_sets_(std::move(node_sets)),
      element_sets_(std::move(element_sets)) {
  validate();
}

HexMesh HexMesh::unchecked(std::vector<Vec3> nodes, std::vector<HexConnectivity> elements,
                           IndexSets node_sets, IndexSets element_sets) {
  HexMesh m;
  m.nodes_ = std::move(nodes);
  m.elements_ = std::move(elements);
  m.node_sets_ = std::move(node_sets);
  m.element_sets_ = std::move(element_sets);
  return m;
}

void HexMesh::validate() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].allFinite()) {
      throw InvalidArgument("node " + std::to_string(i + 1) + " has non-finite coordinates");
    }
  }
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& conn = elements_[e];
    for (int a = 0; a < 8; ++a) {
      if (conn[a] >= nodes_.size()) {
        throw InvalidArgument("element " + std::to_string(e + 1) + " references node " +
                              std::to_string(conn[a] + 1) + " beyond node count " +
                              std::to_string(nodes_.size()));
      }
      for (int b = 0; b < a; ++b) {
        if (conn[a] == conn[b]) {
          throw InvalidArgument("element " + std::to_string(e + 1) + " repeats node " +
                                std::to_string(conn[a] + 1));
        }
      }
    }
    const CornerJacobians sj = scaled_jacobian(element_coords(e));
    const double min_corner = *std::min_element(sj.corner.begin(), sj.corner.end());
    if (sj.degenerate || !(min_corner > 0.0)) {
      throw InvalidArgument("element " + std::to_string(e + 1) +
                            " is not right-handed (minimum corner scaled Jacobian " +
                            std::to_string(min_corner) + ")");
    }
  }
  for (const auto& [name, members] : node_sets_) {
    for (std::size_t n : members) {
      if (n >= nodes_.size()) {
        throw InvalidArgument("node set '" + name + "' references missing node " +
                              std::to_string(n + 1));
      }
    }
  }
  for (const auto& [name, members] : element_sets_) {
    for (std::size_t e : members) {
      if (e >= elements_.size()) {
        throw InvalidArgument("element set '" + name + "' references missing element " +
                              std::to_string(e + 1));
      }
    }
  }
}

ElementCoords HexMesh::element_coords(std::size_t e) const {
  const auto& conn = elements_.at(e);
  ElementCoords x;
  for (int a = 0; a < 8; ++a) x[a] = nodes_[conn[a]];
  return x;
}

const std::vector<std::size_t>& HexMesh::node_set(const std::string& name) const {
  auto it = node_sets_.find(name);
  if (it == node_sets_.end()) throw InvalidArgument("unknown node set '" + name + "'");
  return it->second;
}

double HexMesh::volume() const {
  double v = 0.0;
  for (std::size_t e = 0; e < elements_.size(); ++e) v += hex_volume(element_coords(e));
  return v;
}

std::pair<Vec3, Vec3> HexMesh::bounds() const {
  if (nodes_.empty()) return {Vec3::Zero(), Vec3::Zero()};
  Vec3 lo = nodes_.front();
  Vec3 hi = nodes_.front();
  for (const auto& x : nodes_) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  return {lo, hi};
}

double hex_volume(const ElementCoords& x) {
  const double g = 1.0 / std::sqrt(3.0);
  double v = 0.0;
  for (double xi : {-g, g}) {
    for (double eta : {-g, g}) {
      for (double zeta : {-g, g}) {
        v += detail::natural_jacobian(x, detail::natural_gradients(xi, eta, zeta)).determinant();
      }
    }
  }
  return v;
}

HexMesh generate_box_mesh(const std::array<double, 3>& lengths,
                          const std::array<int, 3>& divisions) {
  for (int d = 0; d < 3; ++d) {
    if (!(lengths[d] > 0.0) || !std::isfinite(lengths[d])) {
      throw InvalidArgument("box length " + std::to_string(d) + " must be positive");
    }
    if (divisions[d] < 1) {
      throw InvalidArgument("box division count " + std::to_string(d) + " must be >= 1");
    }
  }
  const auto [nx, ny, nz] = divisions;
  const auto id = [&](int i, int j, int k) {
    return static_cast<std::size_t>(i + (nx + 1) * (j + (ny + 1) * k));
  };

  std::vector<Vec3> nodes;
  nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1) * (nz + 1)));
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        nodes.emplace_back(lengths[0] * i / nx, lengths[1] * j / ny, lengths[2] * k / nz);
      }
    }
  }

  std::vector<HexConnectivity> elements;
  elements.reserve(static_cast<std::size_t>(nx * ny * nz));
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        elements.push_back({id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k),
                            id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1),
                            id(i, j + 1, k + 1)});
      }
    }
  }

  IndexSets sets;
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        const std::size_t n = id(i, j, k);
        if (k == 0) sets["bottom"].push_back(n);
        if (k == nz) sets["top"].push_back(n);
        if (i == 0) sets["xmin"].push_back(n);
        if (i == nx) sets["xmax"].push_back(n);
        if (j == 0) sets["ymin"].push_back(n);
        if (j == ny) sets["ymax"].push_back(n);
      }
    }
  }
  std::vector<std::size_t> all(elements.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return HexMesh(std::move(nodes), std::move(elements), std::move(sets), {{"all", std::move(all)}});
}

}  // namespace tissuefit
