#include "doctest.h"
#include "support.hpp"

#include "tissuefit/errors.hpp"
#include "tissuefit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace tissuefit;

namespace {

ElementCoords unit_cube(double h = 1.0) {
  return {Vec3(0, 0, 0), Vec3(h, 0, 0), Vec3(h, h, 0), Vec3(0, h, 0),
          Vec3(0, 0, h), Vec3(h, 0, h), Vec3(h, h, h), Vec3(0, h, h)};
}

// Reference corner metric written out by hand: for each corner, the edges to its
// three neighbours in (x-ish, y-ish, z-ish) order.
double brute_corner(const ElementCoords& x, int a) {
  static const int nbr[8][3] = {{1, 3, 4}, {2, 0, 5}, {3, 1, 6}, {0, 2, 7},
                                {7, 5, 0}, {4, 6, 1}, {5, 7, 2}, {6, 4, 3}};
  const Vec3 e1 = (x[nbr[a][0]] - x[a]).normalized();
  const Vec3 e2 = (x[nbr[a][1]] - x[a]).normalized();
  const Vec3 e3 = (x[nbr[a][2]] - x[a]).normalized();
  Mat3 m;
  m << e1, e2, e3;
  return m.determinant();
}

}  // namespace

TEST_CASE("box mesh counts and face sets") {
  const auto single = generate_box_mesh({0.001, 0.001, 0.001}, {1, 1, 1});
  CHECK(single.node_count() == 8);
  CHECK(single.element_count() == 1);

  const auto sample = generate_box_mesh({0.027, 0.027, 0.017}, {9, 9, 6});
  CHECK(sample.node_count() == 700);
  CHECK(sample.element_count() == 486);
  CHECK(sample.node_set("top").size() == 100);
  CHECK(sample.node_set("bottom").size() == 100);
  for (std::size_t n : sample.node_set("top")) CHECK(sample.node(n).z() == doctest::Approx(0.017));
  for (std::size_t n : sample.node_set("bottom")) CHECK(sample.node(n).z() == 0.0);
  CHECK(sample.volume() == doctest::Approx(0.027 * 0.027 * 0.017).epsilon(1e-12));

  const auto odd = generate_box_mesh({0.027, 0.027, 0.017}, {3, 5, 2});
  CHECK(odd.node_set("top").size() == 24);
  CHECK(odd.node_set("bottom").size() == 24);
}

TEST_CASE("box mesh argument validation") {
  CHECK_THROWS_AS(generate_box_mesh({0.0, 1.0, 1.0}, {1, 1, 1}), InvalidArgument);
  CHECK_THROWS_AS(generate_box_mesh({1.0, -1.0, 1.0}, {1, 1, 1}), InvalidArgument);
  CHECK_THROWS_AS(generate_box_mesh({1.0, 1.0, 1.0}, {1, 0, 1}), InvalidArgument);
}

TEST_CASE("mesh construction rejects broken elements and sets") {
  const auto c = unit_cube();
  std::vector<Vec3> nodes(c.begin(), c.end());
  CHECK_NOTHROW(HexMesh(nodes, {{0, 1, 2, 3, 4, 5, 6, 7}}));
  CHECK_THROWS_AS(HexMesh(nodes, {{0, 1, 2, 3, 4, 5, 6, 8}}), InvalidArgument);
  CHECK_THROWS_AS(HexMesh(nodes, {{0, 1, 2, 3, 4, 5, 6, 6}}), InvalidArgument);
  CHECK_THROWS_AS(HexMesh(nodes, {{4, 5, 6, 7, 0, 1, 2, 3}}), InvalidArgument);
  CHECK_THROWS_AS(HexMesh(nodes, {{0, 1, 2, 3, 4, 5, 6, 7}}, {{"s", {9}}}), InvalidArgument);
  CHECK_THROWS_AS(HexMesh(nodes, {{0, 1, 2, 3, 4, 5, 6, 7}}, {}, {{"e", {1}}}), InvalidArgument);
}

TEST_CASE("scaled Jacobian of perfect and sheared cubes") {
  const auto cube = scaled_jacobian(unit_cube());
  for (double v : cube.corner) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cube.mean == doctest::Approx(1.0));
  CHECK_FALSE(cube.degenerate);

  auto sheared = unit_cube();
  for (int a = 4; a < 8; ++a) sheared[a].x() += 1.0;
  const auto s = scaled_jacobian(sheared);
  for (int a = 0; a < 8; ++a) {
    CHECK(s.corner[a] == doctest::Approx(brute_corner(sheared, a)).epsilon(1e-14));
    CHECK(s.corner[a] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(s.corner[a] < 1.0);
  }

  // General jittered element against the brute-force corner triple products.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> j(-0.2, 0.2);
  auto bent = unit_cube();
  for (auto& p : bent) p += Vec3(j(rng), j(rng), j(rng));
  const auto b = scaled_jacobian(bent);
  double sum = 0.0;
  for (int a = 0; a < 8; ++a) {
    CHECK(b.corner[a] == doctest::Approx(brute_corner(bent, a)).epsilon(1e-13));
    sum += b.corner[a];
  }
  CHECK(b.mean == doctest::Approx(sum / 8.0).epsilon(1e-14));
}

TEST_CASE("collapsed edge reports zero and is flagged") {
  auto c = unit_cube();
  std::vector<Vec3> nodes(c.begin(), c.end());
  nodes[6] = nodes[7];
  const auto mesh = HexMesh::unchecked(nodes, {{0, 1, 2, 3, 4, 5, 6, 7}});
  const auto q = element_scaled_jacobian(mesh, 0);
  CHECK(q.degenerate);
  CHECK(q.corner[6] == 0.0);
  CHECK(q.corner[7] == 0.0);
  const auto report = mesh_quality(mesh);
  REQUIRE(report.flagged_elements.size() == 1);
  CHECK(report.flagged_elements[0] == 0);
  CHECK_THROWS_AS(HexMesh(nodes, {{0, 1, 2, 3, 4, 5, 6, 7}}), InvalidArgument);
}

TEST_CASE("mesh quality aggregates element means") {
  CHECK_THROWS_AS(mesh_quality(HexMesh()), InvalidArgument);

  const auto rect = generate_box_mesh({0.027, 0.013, 0.017}, {4, 7, 3});
  const auto r = mesh_quality(rect);
  CHECK(r.mesh_mean_jacobian == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.min_corner_jacobian == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.node_count == rect.node_count());
  CHECK(r.element_count == rect.element_count());
  CHECK(r.flagged_elements.empty());

  std::mt19937_64 rng(11);
  const auto m = testing::random_mesh(rng);
  const auto q = mesh_quality(m);
  const double mean = std::accumulate(q.per_element_mean_jacobian.begin(), q.per_element_mean_jacobian.end(), 0.0) /
                      static_cast<double>(q.per_element_mean_jacobian.size());
  CHECK(q.mesh_mean_jacobian == doctest::Approx(mean).epsilon(1e-13));
  for (double v : q.per_element_mean_jacobian) {
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("two-element mesh mean is the arithmetic mean of its elements") {
  // Two stacked cells, the upper one sheared; each element mean is known separately.
  std::vector<Vec3> nodes;
  for (int k = 0; k < 3; ++k) {
    const double shift = k == 2 ? 0.5 : 0.0;
    nodes.insert(nodes.end(), {Vec3(shift, 0, k), Vec3(1 + shift, 0, k), Vec3(1 + shift, 1, k), Vec3(shift, 1, k)});
  }
  const HexMesh mesh(nodes, {{0, 1, 2, 3, 4, 5, 6, 7}, {4, 5, 6, 7, 8, 9, 10, 11}});
  const double m0 = element_scaled_jacobian(mesh, 0).mean;
  const double m1 = element_scaled_jacobian(mesh, 1).mean;
  CHECK(m0 == doctest::Approx(1.0));
  CHECK(m1 < 1.0);
  CHECK(mesh_quality(mesh).mesh_mean_jacobian == doctest::Approx(0.5 * (m0 + m1)).epsilon(1e-15));
}

TEST_CASE("mesh mean Jacobian invariant under rotation, scaling and element permutation") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = testing::random_mesh(rng);
    const double ref = mesh_quality(m).mesh_mean_jacobian;

    const Mat3 q = testing::random_rotation(rng);
    const double s = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
    std::vector<Vec3> moved;
    for (const auto& x : m.nodes()) moved.push_back(s * (q * x) + Vec3(1, -2, 3));
    const HexMesh transformed(moved, m.elements());
    CHECK(mesh_quality(transformed).mesh_mean_jacobian == doctest::Approx(ref).epsilon(1e-12));

    auto elems = m.elements();
    std::shuffle(elems.begin(), elems.end(), rng);
    const HexMesh permuted(m.nodes(), elems);
    CHECK(mesh_quality(permuted).mesh_mean_jacobian == doctest::Approx(ref).epsilon(1e-14));
  }
}

TEST_CASE("serialize then parse reproduces a generated sample mesh") {
  const auto mesh = generate_box_mesh({0.027, 0.027, 0.017}, {9, 9, 6});
  const auto back = parse_mesh_string(serialize_mesh(mesh));
  CHECK(back.elements() == mesh.elements());
  CHECK(back.node_sets() == mesh.node_sets());
  CHECK(back.element_sets() == mesh.element_sets());
  REQUIRE(back.node_count() == mesh.node_count());
  for (std::size_t i = 0; i < mesh.node_count(); ++i) CHECK(back.node(i) == mesh.node(i));
}

TEST_CASE("parse/serialize round trip on randomized meshes") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto mesh = testing::random_mesh(rng);
    const std::string text = serialize_mesh(mesh);
    const auto back = parse_mesh_string(text);
    REQUIRE(back.elements() == mesh.elements());
    REQUIRE(back.node_sets() == mesh.node_sets());
    REQUIRE(back.element_sets() == mesh.element_sets());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) REQUIRE(back.node(i) == mesh.node(i));
    CHECK(serialize_mesh(back) == text);
  }
}

TEST_CASE("minimal hand-written file parses") {
  const auto mesh = read_mesh_file(testing::fixture("unit_cube.mesh"));
  CHECK(mesh.node_count() == 8);
  CHECK(mesh.element_count() == 1);
  CHECK(mesh.node_set("bottom") == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(mesh_quality(mesh).mesh_mean_jacobian == doctest::Approx(1.0));
}

TEST_CASE("section names are case-insensitive and comments are skipped") {
  const std::string text =
      "# header\n*nodes\n1 0 0 0\n2 1 0 0 # trailing\n3 1 1 0\n4 0 1 0\n5 0 0 1\n6 1 0 1\n7 1 1 1\n8 0 1 1\n"
      "\n*Elements\n1, 1, 2, 3, 4, 5, 6, 7, 8\n*elset solid\n1\n";
  const auto mesh = parse_mesh_string(text);
  CHECK(mesh.element_count() == 1);
  CHECK(mesh.element_sets().at("solid") == std::vector<std::size_t>{0});
}

namespace {

struct BadFixture {
  const char* file;
  std::size_t line;
  const char* fragment;
};

}  // namespace

TEST_CASE("invalid fixtures are rejected with located errors") {
  const BadFixture cases[] = {
      {"bad_node_index.mesh", 11, "element 1 references node 9"},
      {"left_handed.mesh", 11, "element 1"},
      {"repeated_node.mesh", 11, "element 1 repeats node"},
      {"unknown_section.mesh", 10, "unknown section '*FACES'"},
      {"bad_set.mesh", 14, "node set 'top' references"},
      {"bad_number.mesh", 5, "abc"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.file);
    try {
      (void)read_mesh_file(testing::fixture(c.file));
      FAIL("accepted an invalid mesh");
    } catch (const ParseError& e) {
      CHECK(e.line() == c.line);
      CHECK(std::string(e.what()).find(c.fragment) != std::string::npos);
      CHECK(std::string(e.what()).find(c.file) != std::string::npos);
    }
  }
}

TEST_CASE("missing file and out-of-sequence indices") {
  CHECK_THROWS_AS(read_mesh_file("/nonexistent/mesh.txt"), InvalidArgument);
  CHECK_THROWS_AS(parse_mesh_string("*NODES\n1 0 0 0\n3 1 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_mesh_string("1 0 0 0\n"), ParseError);
}
