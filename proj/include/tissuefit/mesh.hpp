#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tissuefit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Corner ordering of an 8-node hexahedron: bottom face counter-clockwise when
/// viewed from +z (0,1,2,3), then the top face in the same order (4,5,6,7).
/// In the unit cube node 0 sits at the origin, 1 on +x, 3 on +y, 4 on +z.
using HexConnectivity = std::array<std::size_t, 8>;
using ElementCoords = std::array<Vec3, 8>;
using IndexSets = std::map<std::string, std::vector<std::size_t>>;

/// Nodes (meters), hexahedral elements and named node/element sets. Immutable
/// once constructed; the constructor enforces every structural invariant.
class HexMesh {
 public:
  HexMesh() = default;
  HexMesh(std::vector<Vec3> nodes, std::vector<HexConnectivity> elements,
          IndexSets node_sets = {}, IndexSets element_sets = {});

  /// Skips validation. Only for exercising degenerate-element handling.
  static HexMesh unchecked(std::vector<Vec3> nodes, std::vector<HexConnectivity> elements,
                           IndexSets node_sets = {}, IndexSets element_sets = {});

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t element_count() const noexcept { return elements_.size(); }
  bool empty() const noexcept { return elements_.empty(); }

  const std::vector<Vec3>& nodes() const noexcept { return nodes_; }
  const std::vector<HexConnectivity>& elements() const noexcept { return elements_; }
  const IndexSets& node_sets() const noexcept { return node_sets_; }
  const IndexSets& element_sets() const noexcept { return element_sets_; }

  const Vec3& node(std::size_t i) const { return nodes_.at(i); }
  const HexConnectivity& element(std::size_t e) const { return elements_.at(e); }
  ElementCoords element_coords(std::size_t e) const;

  bool has_node_set(const std::string& name) const { return node_sets_.count(name) != 0; }
  /// Throws InvalidArgument naming the set when it does not exist.
  const std::vector<std::size_t>& node_set(const std::string& name) const;

  /// Sum of exact trilinear element volumes.
  double volume() const;
  /// Axis-aligned bounding box as (min, max).
  std::pair<Vec3, Vec3> bounds() const;

 private:
  void validate() const;

  std::vector<Vec3> nodes_;
  std::vector<HexConnectivity> elements_;
  IndexSets node_sets_;
  IndexSets element_sets_;
};

/// Exact volume of a trilinear hexahedron (2x2x2 Gauss integration of det J).
double hex_volume(const ElementCoords& x);

/// Structured axis-aligned box with its minimum corner at the origin. Creates node
/// sets "bottom"/"top" (min/max z) and "xmin", "xmax", "ymin", "ymax".
HexMesh generate_box_mesh(const std::array<double, 3>& lengths,
                          const std::array<int, 3>& divisions);

// --- quality ---------------------------------------------------------------

struct CornerJacobians {
  std::array<double, 8> corner{};
  double mean = 0.0;
  bool degenerate = false;  // some corner had a zero-length edge
};

/// Per-corner scaled Jacobian: determinant of the three unit edge vectors that
/// leave each corner, in right-handed order.
CornerJacobians scaled_jacobian(const ElementCoords& x);
CornerJacobians element_scaled_jacobian(const HexMesh& mesh, std::size_t element);

struct QualityReport {
  std::vector<double> per_element_mean_jacobian;
  double mesh_mean_jacobian = 0.0;
  double min_corner_jacobian = 0.0;
  std::size_t node_count = 0;
  std::size_t element_count = 0;
  std::vector<std::size_t> flagged_elements;  // some corner <= 0 or degenerate
};

QualityReport mesh_quality(const HexMesh& mesh);

// --- file format -----------------------------------------------------------

HexMesh parse_mesh(std::istream& in);
HexMesh parse_mesh_string(const std::string& text);
void serialize_mesh(const HexMesh& mesh, std::ostream& out);
std::string serialize_mesh(const HexMesh& mesh);

HexMesh read_mesh_file(const std::string& path);
void write_mesh_file(const HexMesh& mesh, const std::string& path);

}  // namespace tissuefit
