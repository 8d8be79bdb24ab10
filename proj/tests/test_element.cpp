#include "doctest.h"
#include "support.hpp"

#include "tissuefit/element.hpp"
#include "tissuefit/errors.hpp"

#include <cmath>

using namespace tissuefit;

namespace {

const OgdenParams kTable2(1200.0, -6.3);
constexpr double kEdge = 0.001;

ElementCoords cube(double h = kEdge) {
  return {Vec3(0, 0, 0), Vec3(h, 0, 0), Vec3(h, h, 0), Vec3(0, h, 0),
          Vec3(0, 0, h), Vec3(h, 0, h), Vec3(h, h, h), Vec3(0, h, h)};
}

ElementCoords jittered(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> j(-0.2 * kEdge, 0.2 * kEdge);
  auto x = cube();
  for (auto& p : x) p += Vec3(j(rng), j(rng), j(rng));
  return x;
}

ElementCoords map(const ElementCoords& x, const Mat3& f, const Vec3& t = Vec3::Zero()) {
  ElementCoords y;
  for (int a = 0; a < 8; ++a) y[a] = f * x[a] + t;
  return y;
}

double max_norm(const std::array<Vec3, 8>& f) {
  double m = 0.0;
  for (const auto& v : f) m = std::max(m, v.norm());
  return m;
}

}  // namespace

TEST_CASE("reference geometry of the one-point element") {
  const auto ref = make_reference_element(cube());
  CHECK(ref.volume == doctest::Approx(1e-9).epsilon(1e-12));
  Vec3 sum = Vec3::Zero();
  Mat3 moment = Mat3::Zero();
  for (int a = 0; a < 8; ++a) {
    sum += ref.gradients[a];
    moment += cube()[a] * ref.gradients[a].transpose();
  }
  CHECK(sum.norm() < 1e-9);
  CHECK((moment - Mat3::Identity()).norm() < 1e-12);

  // Hourglass vectors are orthogonal to constant and linear fields and unit length.
  std::mt19937_64 rng(1);
  const auto x = jittered(rng);
  const auto r = make_reference_element(x);
  for (int m = 0; m < 4; ++m) {
    double s = 0.0;
    Vec3 lin = Vec3::Zero();
    for (int a = 0; a < 8; ++a) {
      s += r.hourglass[m][a];
      lin += r.hourglass[m][a] * x[a];
    }
    CHECK(std::abs(s) < 1e-12);
    CHECK(lin.norm() < 1e-15);
  }
  const auto c = make_reference_element(cube());
  for (int m = 0; m < 4; ++m) {
    double n2 = 0.0;
    for (int a = 0; a < 8; ++a) n2 += c.hourglass[m][a] * c.hourglass[m][a];
    CHECK(std::sqrt(n2) == doctest::Approx(1.0));
  }

  auto flipped = cube();
  std::swap(flipped[0], flipped[4]);
  std::swap(flipped[1], flipped[5]);
  std::swap(flipped[2], flipped[6]);
  std::swap(flipped[3], flipped[7]);
  CHECK_THROWS_AS(make_reference_element(flipped), InvalidState);
}

TEST_CASE("undeformed and rigidly moved elements carry no force") {
  const auto x = cube();
  const auto same = element_internal_force(x, x, kTable2);
  CHECK(max_norm(same.force) == 0.0);
  CHECK(same.energy == 0.0);

  std::mt19937_64 rng(2);
  const double scale = 1e-9 * kTable2.mu() * kEdge * kEdge;
  for (int trial = 0; trial < 20; ++trial) {
    const auto ref = jittered(rng);
    const Mat3 q = testing::random_rotation(rng);
    const auto moved = map(ref, q, Vec3(0.01, -0.02, 0.003));
    CHECK(max_norm(element_internal_force(ref, moved, kTable2).force) < scale);
    CHECK(max_norm(hourglass_force(ref, moved, kTable2, 0.05).force) < scale);
  }
}

TEST_CASE("uniaxial stretch of a unit cube matches the nominal stress oracle") {
  // Lateral stretch 0.9142766 zeroes the lateral Cauchy stress at lambda_z = 1.2 for nu = 0.49.
  const double lat = 0.91427660;
  const Mat3 f = Eigen::Vector3d(lat, lat, 1.2).asDiagonal();
  const auto ef = element_internal_force(cube(), map(cube(), f), kTable2);
  CHECK(std::abs(ef.stress.cauchy(0, 0)) < 0.05);

  double top = 0.0;
  for (int a = 4; a < 8; ++a) top += ef.force[a].z();
  const double area = kEdge * kEdge;
  const double oracle = uniaxial_nominal_stress(1.2, 1200.0, -6.3) * area;
  CHECK(top == doctest::Approx(oracle).epsilon(0.01));
  // Compressible homogeneous value (root-solved offline): 460.6517 Pa.
  CHECK(top / area == doctest::Approx(460.6517).epsilon(1e-5));

  double bottom = 0.0;
  for (int a = 0; a < 4; ++a) bottom += ef.force[a].z();
  CHECK(bottom == doctest::Approx(-top).epsilon(1e-12));
}

TEST_CASE("inverted element is reported") {
  const Mat3 f = Eigen::Vector3d(1.0, 1.0, -0.5).asDiagonal();
  CHECK_THROWS_AS(element_internal_force(cube(), map(cube(), f), kTable2), InvalidState);
}

TEST_CASE("hourglass control leaves affine fields alone") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ref = jittered(rng);
    Mat3 f = Mat3::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) f(i, j) += n(rng);
    const auto hg = hourglass_force(ref, map(ref, f, Vec3(1e-3, 0, 0)), kTable2, 0.05);
    CHECK(max_norm(hg.force) < 1e-12 * kTable2.mu() * kEdge * kEdge);
    CHECK(hg.energy < 1e-30);
  }
}

TEST_CASE("hourglass mode is resisted with quadratic energy") {
  const auto ref = cube();
  const auto r = make_reference_element(ref);
  const double delta = 1e-5;
  for (int m = 0; m < 4; ++m) {
    const auto displaced = [&](double amp) {
      ElementCoords x = ref;
      for (int a = 0; a < 8; ++a) x[a].y() += amp * r.hourglass[m][a];
      return x;
    };
    const auto h1 = hourglass_force(r, displaced(delta), kTable2, 0.05);
    const auto h2 = hourglass_force(r, displaced(2 * delta), kTable2, 0.05);
    double work = 0.0;
    for (int a = 0; a < 8; ++a) work += h1.force[a].y() * r.hourglass[m][a] * delta;
    CHECK(work > 0.0);  // internal force points along the mode, so the acceleration opposes it
    CHECK(h1.energy > 0.0);
    CHECK(h2.energy == doctest::Approx(4.0 * h1.energy).epsilon(1e-12));
    CHECK(work == doctest::Approx(2.0 * h1.energy).epsilon(1e-12));
    CHECK(h1.modes[m].y() == doctest::Approx(delta).epsilon(1e-12));

    const auto off = hourglass_force(r, displaced(delta), kTable2, 0.0);
    CHECK(max_norm(off.force) == 0.0);
    CHECK(off.energy == 0.0);
  }
  // The one-point element itself has no stiffness against these modes.
  ElementCoords x = ref;
  for (int a = 0; a < 8; ++a) x[a].y() += delta * r.hourglass[3][a];
  CHECK(max_norm(element_internal_force(r, x, kTable2).force) < 1e-12);
}

TEST_CASE("element forces are the gradient of element energy") {
  std::mt19937_64 rng(6);
  const auto ref = jittered(rng);
  const auto r = make_reference_element(ref);
  std::normal_distribution<double> n(0.0, 0.05 * kEdge);
  ElementCoords x = ref;
  for (auto& p : x) p += Vec3(n(rng), n(rng), n(rng));
  const auto total = [&](const ElementCoords& y) {
    return element_internal_force(r, y, kTable2).energy + hourglass_force(r, y, kTable2, 0.05).energy;
  };
  const auto ef = element_internal_force(r, x, kTable2);
  const auto hg = hourglass_force(r, x, kTable2, 0.05);
  const double h = 1e-10;
  for (int a = 0; a < 8; ++a) {
    for (int c = 0; c < 3; ++c) {
      ElementCoords p = x, m = x;
      p[a][c] += h;
      m[a][c] -= h;
      const double fd = (total(p) - total(m)) / (2 * h);
      CHECK(ef.force[a][c] + hg.force[a][c] == doctest::Approx(fd).epsilon(1e-5).scale(1e-9));
    }
  }
}
