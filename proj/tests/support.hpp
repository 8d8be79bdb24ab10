#pragma once

#include "tissuefit/mesh.hpp"

#include <Eigen/Geometry>

#include <filesystem>
#include <random>
#include <string>

namespace testing {

using tissuefit::HexMesh;
using tissuefit::Mat3;
using tissuefit::Vec3;

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Structured box with jittered interior nodes plus random extra sets.
inline HexMesh random_mesh(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> div(1, 4);
  std::uniform_real_distribution<double> len(0.002, 0.05);
  const std::array<int, 3> d{div(rng), div(rng), div(rng)};
  const HexMesh box = tissuefit::generate_box_mesh({len(rng), len(rng), len(rng)}, d);

  std::vector<Vec3> nodes = box.nodes();
  std::uniform_real_distribution<double> jitter(-0.15, 0.15);
  const auto [lo, hi] = box.bounds();
  for (auto& x : nodes) {
    for (int c = 0; c < 3; ++c) {
      const double h = (hi[c] - lo[c]) / d[static_cast<std::size_t>(c)];
      x[c] += jitter(rng) * h;
    }
  }
  tissuefit::IndexSets node_sets = box.node_sets();
  tissuefit::IndexSets element_sets = box.element_sets();
  std::uniform_int_distribution<std::size_t> pick_node(0, nodes.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_elem(0, box.element_count() - 1);
  std::vector<std::size_t> ns(1 + pick_node(rng) % 20);
  for (auto& v : ns) v = pick_node(rng);
  node_sets["random_nodes"] = ns;
  element_sets["random_elements"] = {pick_elem(rng)};
  return HexMesh(std::move(nodes), box.elements(), std::move(node_sets), std::move(element_sets));
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tissuefit_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string fixture(const std::string& name) { return std::string(TISSUEFIT_FIXTURE_DIR) + "/" + name; }

}  // namespace testing
