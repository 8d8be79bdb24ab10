#include "doctest.h"
#include "support.hpp"

#include "tissuefit/dynamics.hpp"
#include "tissuefit/errors.hpp"

#include <cmath>
#include <sstream>

using namespace tissuefit;

namespace {

const OgdenParams kTable2(1200.0, -6.3);

HexMesh unit_cube() { return generate_box_mesh({0.001, 0.001, 0.001}, {1, 1, 1}); }

std::vector<Vec3> mapped(const std::vector<Vec3>& x, const Mat3& f, const Vec3& t = Vec3::Zero()) {
  std::vector<Vec3> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f * x[i] + t;
  return y;
}

double largest_mode(const HexMesh& mesh, const std::vector<Vec3>& positions) {
  double q = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto ref = make_reference_element(mesh.element_coords(e));
    ElementCoords x;
    for (int a = 0; a < 8; ++a) x[a] = positions[mesh.element(e)[a]];
    for (const auto& m : hourglass_force(ref, x, kTable2, 1.0).modes) q = std::max(q, m.norm());
  }
  return q;
}

// Ramp durations are simulated time, so a faster loading rate means a shorter ramp.
std::vector<BoundaryCondition> tension_bcs(double stretch, double ramp = 0.2) {
  return {BoundaryCondition::fixed("bottom"), BoundaryCondition::lateral("top"),
          BoundaryCondition::axial("top", Axis::z, stretch, ramp)};
}

}  // namespace

TEST_CASE("smooth step") {
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(0.5) == 0.5);
  CHECK(smooth_step(0.25) == 0.103515625);
  CHECK(smooth_step(-2.0) == 0.0);
  CHECK(smooth_step(3.0) == 1.0);
  const double h = 1e-6;
  CHECK(std::abs(smooth_step(h) - smooth_step(0.0)) / h < 1e-9);
  CHECK(std::abs(smooth_step(1.0) - smooth_step(1.0 - h)) / h < 1e-9);
  for (double x = 0.05; x < 1.0; x += 0.05) CHECK(smooth_step(x + 1e-3) > smooth_step(x));
}

TEST_CASE("lumped masses") {
  const auto m = lumped_masses(unit_cube(), 1000.0);
  REQUIRE(m.size() == 8);
  for (double v : m) CHECK(v == doctest::Approx(1.25e-7).epsilon(1e-12));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mesh = testing::random_mesh(rng);
    const auto mm = lumped_masses(mesh, 1000.0);
    double sum = 0.0;
    for (double v : mm) sum += v;
    CHECK(sum == doctest::Approx(1000.0 * mesh.volume()).epsilon(1e-12));
    const auto scaled = lumped_masses(mesh, 1000.0, 100.0);
    for (std::size_t i = 0; i < mm.size(); ++i) CHECK(scaled[i] == doctest::Approx(100.0 * mm[i]).epsilon(1e-14));
  }

  auto nodes = unit_cube().nodes();
  for (int a = 4; a < 8; ++a) nodes[a].z() = -0.001;
  const auto inverted = HexMesh::unchecked(nodes, unit_cube().elements());
  CHECK_THROWS_AS(lumped_masses(inverted, 1000.0), InvalidState);
  CHECK_THROWS_AS(lumped_masses(unit_cube(), 0.0), InvalidArgument);
}

TEST_CASE("stable time step") {
  SimConfig cfg;
  CHECK(stable_time_step(unit_cube(), kTable2, cfg) == doctest::Approx(1.150447e-4).epsilon(1e-6));

  const auto coarse = generate_box_mesh({0.004, 0.002, 0.006}, {2, 1, 3});
  const auto fine = generate_box_mesh({0.002, 0.001, 0.003}, {2, 1, 3});
  CHECK(stable_time_step(fine, kTable2, cfg) == doctest::Approx(0.5 * stable_time_step(coarse, kTable2, cfg)));

  SimConfig heavy;
  heavy.mass_scaling = 4.0;
  CHECK(stable_time_step(coarse, kTable2, heavy) == doctest::Approx(2.0 * stable_time_step(coarse, kTable2, cfg)));

  // The automatic step bounds the element eigenfrequencies: h / (c sqrt 3) for a cube.
  const std::vector<BoundaryCondition> none;
  const ExplicitModel model(unit_cube(), kTable2, cfg, none);
  const auto s = model.initial_state();
  const auto f = model.internal_forces(s.positions, 0.0);
  CHECK(model.current_stable_time_step(s.positions, f) ==
        doctest::Approx(stable_time_step(unit_cube(), kTable2, cfg) / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("central difference update") {
  const auto mesh = unit_cube();
  const std::vector<BoundaryCondition> none;
  const ExplicitModel model(mesh, kTable2, SimConfig{}, none);
  const DofConstraints free(mesh, none);
  const double dt = 1e-6;

  SUBCASE("zero force keeps velocity") {
    auto s = model.initial_state();
    for (auto& v : s.velocities) v = Vec3(0.01, -0.02, 0.005);
    InternalForces f;
    f.nodal.assign(8, Vec3::Zero());
    advance(s, f, free, mesh.nodes(), dt);
    for (std::size_t n = 0; n < 8; ++n) {
      CHECK((s.positions[n] - mesh.node(n) - dt * Vec3(0.01, -0.02, 0.005)).norm() < 1e-18);
    }
    CHECK(s.time == dt);
  }

  SUBCASE("constant force gives uniform acceleration") {
    auto s = model.initial_state();
    InternalForces f;
    f.nodal.assign(8, Vec3(0.0, 0.0, 1.25e-7 * 9.81));  // resisting force: acceleration -9.81 along z
    const int steps = 50;
    for (int i = 0; i < steps; ++i) advance(s, f, free, mesh.nodes(), dt);
    const double t = steps * dt;
    for (std::size_t n = 0; n < 8; ++n) {
      CHECK(s.positions[n].z() - mesh.node(n).z() == doctest::Approx(-0.5 * 9.81 * t * t).epsilon(1e-9));
      CHECK(s.accelerations[n].z() == doctest::Approx(-9.81).epsilon(1e-12));
    }
  }

  SUBCASE("fixed nodes stay put") {
    const std::vector<BoundaryCondition> bcs{BoundaryCondition::fixed("bottom")};
    const DofConstraints fixed(mesh, bcs);
    auto s = model.initial_state();
    InternalForces f;
    f.nodal.assign(8, Vec3(1e-3, 2e-3, -3e-3));
    for (int i = 0; i < 10; ++i) advance(s, f, fixed, mesh.nodes(), dt);
    for (std::size_t n : mesh.node_set("bottom")) CHECK(s.positions[n] == mesh.node(n));
    for (std::size_t n : mesh.node_set("top")) CHECK(s.positions[n] != mesh.node(n));
  }

  SUBCASE("non-finite force diverges") {
    auto s = model.initial_state();
    InternalForces f;
    f.nodal.assign(8, Vec3::Zero());
    f.nodal[3].x() = std::nan("");
    CHECK_THROWS_AS(advance(s, f, free, mesh.nodes(), dt), DivergenceError);
    CHECK_THROWS_AS(advance(s, f, free, mesh.nodes(), 0.0), InvalidArgument);
  }
}

TEST_CASE("assembled forces are the gradient of the total stored energy") {
  std::mt19937_64 rng(17);
  const auto box = generate_box_mesh({0.002, 0.002, 0.002}, {2, 2, 2});
  const std::vector<BoundaryCondition> none;
  const ExplicitModel model(box, kTable2, SimConfig{}, none);
  std::normal_distribution<double> n(0.0, 5e-5);
  std::vector<Vec3> x = box.nodes();
  for (auto& p : x) p += Vec3(n(rng), n(rng), n(rng));
  const auto energy = [&](const std::vector<Vec3>& y) {
    const auto f = model.internal_forces(y, 0.0);
    return f.internal_energy + f.hourglass_energy;
  };
  const auto f = model.internal_forces(x, 0.0);
  const double h = 1e-10;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      auto p = x, m = x;
      p[i][c] += h;
      m[i][c] -= h;
      CHECK(f.nodal[i][c] == doctest::Approx((energy(p) - energy(m)) / (2 * h)).epsilon(1e-5).scale(1e-8));
    }
  }
}

TEST_CASE("undeformed and rigidly moved meshes carry no force") {
  std::mt19937_64 rng(21);
  const auto mesh = testing::random_mesh(rng);
  const std::vector<BoundaryCondition> none;
  const ExplicitModel model(mesh, kTable2, SimConfig{}, none);
  const auto rest = model.internal_forces(mesh.nodes(), 0.0);
  for (const auto& f : rest.nodal) CHECK(f.norm() == 0.0);
  CHECK(rest.internal_energy == 0.0);

  const auto moved = mapped(mesh.nodes(), testing::random_rotation(rng), Vec3(0.1, 0.2, -0.3));
  const auto r = model.internal_forces(moved, 0.0);
  const double scale = kTable2.mu() * 1e-4 * 1e-4;
  for (const auto& f : r.nodal) CHECK(f.norm() < 1e-8 * scale);
}

TEST_CASE("patch test: prescribed affine boundary motion gives a uniform state") {
  // 2x2x2 box; every boundary node follows F = I + 0.1 e_z e_z + 0.05 e_x e_z, the centre node is free.
  const auto box = generate_box_mesh({0.002, 0.002, 0.002}, {2, 2, 2});
  Mat3 f = Mat3::Identity();
  f(2, 2) = 1.1;
  f(0, 2) = 0.05;
  IndexSets sets = box.node_sets();
  std::vector<BoundaryCondition> bcs;
  std::size_t interior = box.node_count();
  for (std::size_t i = 0; i < box.node_count(); ++i) {
    const Vec3& x = box.node(i);
    const bool inside = std::abs(x.x() - 0.001) < 1e-9 && std::abs(x.y() - 0.001) < 1e-9 && std::abs(x.z() - 0.001) < 1e-9;
    if (inside) {
      interior = i;
      continue;
    }
    const std::string name = "n" + std::to_string(i);
    sets[name] = {i};
    const Vec3 u = (f - Mat3::Identity()) * x;
    for (Axis a : {Axis::x, Axis::y, Axis::z}) bcs.push_back(BoundaryCondition::axial(name, a, u[component(a)], 1.0));
  }
  REQUIRE(interior < box.node_count());
  const HexMesh mesh(box.nodes(), box.elements(), sets, box.element_sets());

  RunOptions opts;
  opts.tracked_sets = {"top"};
  const auto r = run_simulation(mesh, bcs, SimConfig{}, kTable2, opts);

  CHECK((r.final_positions[interior] - f * box.node(interior)).norm() < 1e-3 * 0.0001);
  const auto s = cauchy_stress(DeformationGradient(f), kTable2);
  const Mat3 piola = f.determinant() * s.cauchy * f.inverse().transpose();
  CHECK(-reaction_force(r, "top").back() == doctest::Approx(piola(2, 2) * 4e-6).epsilon(0.005));

  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    ElementCoords x;
    for (int a = 0; a < 8; ++a) x[a] = r.final_positions[mesh.element(e)[a]];
    const auto ef = element_internal_force(mesh.element_coords(e), x, kTable2);
    CHECK((ef.stress.cauchy - s.cauchy).norm() < 0.005 * s.cauchy.norm());
  }
}

TEST_CASE("energy balance, determinism and step-size insensitivity") {
  const auto mesh = generate_box_mesh({0.01, 0.01, 0.01}, {2, 2, 2});
  SimConfig cfg;
  cfg.rate_scaling = 5.0;
  const auto bcs = tension_bcs(0.001);
  const auto a = run_simulation(mesh, bcs, cfg, kTable2);
  CHECK(a.max_balance_error < 0.02);
  CHECK(a.final_ke_ie() < 0.05);
  CHECK(a.energies.back().external_work == doctest::Approx(a.energies.back().internal).epsilon(0.02));
  CHECK(a.time.size() == 101);
  CHECK(a.time.back() * a.rate_scaling == doctest::Approx(1.0));
  CHECK(a.displacement.back() == doctest::Approx(0.001));

  std::ostringstream first, second;
  write_result_csv(a, "bottom", first);
  write_result_csv(run_simulation(mesh, bcs, cfg, kTable2), "bottom", second);
  CHECK(first.str() == second.str());
  CHECK(first.str().rfind("time_s,displacement_m,force_N,internal_J,kinetic_J,hourglass_J,external_work_J\n", 0) == 0);

  SimConfig half = cfg;
  half.dt_safety = 0.45;
  const auto b = run_simulation(mesh, bcs, half, kTable2);
  CHECK(b.steps > a.steps);
  CHECK(reaction_force(b, "bottom").back() == doctest::Approx(reaction_force(a, "bottom").back()).epsilon(0.005));
}

TEST_CASE("reactions") {
  const auto mesh = generate_box_mesh({0.01, 0.01, 0.01}, {2, 2, 2});
  SimConfig cfg;
  cfg.rate_scaling = 5.0;
  const auto r = run_simulation(mesh, tension_bcs(0.001), cfg, kTable2);
  const double base = reaction_force(r, "bottom").back();
  const double top = reaction_force(r, "top").back();
  CHECK(base > 0.0);
  CHECK(top < 0.0);
  CHECK(top == doctest::Approx(-base).epsilon(0.01));
  CHECK_THROWS_AS(reaction_force(r, "xmin"), InvalidArgument);

  const auto c = run_simulation(mesh, tension_bcs(-0.001), cfg, kTable2);
  CHECK(reaction_force(c, "bottom").back() < 0.0);

  RunOptions opts;
  opts.tracked_sets = {"nope"};
  CHECK_THROWS_AS(run_simulation(mesh, tension_bcs(0.001), cfg, kTable2, opts), InvalidArgument);
}

TEST_CASE("zero prescribed displacement leaves the mesh at rest") {
  const auto mesh = generate_box_mesh({0.01, 0.01, 0.01}, {2, 2, 2});
  const auto r = run_simulation(mesh, tension_bcs(0.0, 1.0), SimConfig{}, kTable2);
  CHECK(r.time.size() == 2);
  for (const auto& [name, f] : r.reactions)
    for (double v : f) CHECK(v == 0.0);
  for (std::size_t i = 0; i < mesh.node_count(); ++i) CHECK(r.final_positions[i] == mesh.node(i));
}

TEST_CASE("hourglass control keeps a bent column quasi-static") {
  // One element thick, sheared at the top: the bending deformation is an hourglass pattern.
  const auto mesh = generate_box_mesh({0.01, 0.01, 0.04}, {1, 1, 4});
  const std::vector<BoundaryCondition> bcs{BoundaryCondition::fixed("bottom"),
                                           BoundaryCondition::axial("top", Axis::x, 0.004, 1.0)};
  RunOptions opts;
  opts.tracked_sets = {"bottom"};
  opts.enforce_energy_balance = false;

  SimConfig with;
  const auto controlled = run_simulation(mesh, bcs, with, kTable2, opts);
  SimConfig without;
  without.hourglass_coefficient = 0.0;
  const auto bare = run_simulation(mesh, bcs, without, kTable2, opts);

  CHECK(controlled.final_ke_ie() < 0.05);
  CHECK(controlled.max_balance_error < 0.02);
  CHECK(bare.final_ke_ie() > 1.0);
  CHECK(largest_mode(mesh, bare.final_positions) > 1.5 * largest_mode(mesh, controlled.final_positions));
}

TEST_CASE("constraint compilation") {
  const auto mesh = unit_cube();
  const std::vector<BoundaryCondition> ok{BoundaryCondition::fixed("bottom"), BoundaryCondition::axial("xmin", Axis::x, 0.0, 1.0),
                                          BoundaryCondition::lateral("top"),
                                          BoundaryCondition::axial("top", Axis::z, 0.001, 2.0),
                                          BoundaryCondition::axial("top", Axis::z, 0.001, 2.0)};
  const DofConstraints c(mesh, ok);
  CHECK(c.ramp_end() == 2.0);
  const std::size_t corner = mesh.node_set("top").front();
  CHECK(c.constrained(corner, 2));
  CHECK(c.displacement(corner, 2, 1.0) == doctest::Approx(0.0005));
  CHECK(c.displacement(corner, 2, 5.0) == 0.001);

  const std::vector<BoundaryCondition> clash{BoundaryCondition::fixed("bottom"),
                                             BoundaryCondition::axial("xmin", Axis::z, 0.001, 1.0)};
  CHECK_THROWS_WITH_AS(DofConstraints(mesh, clash), doctest::Contains("conflicting"), InvalidArgument);
  const std::vector<BoundaryCondition> unknown{BoundaryCondition::fixed("nowhere")};
  CHECK_THROWS_AS(DofConstraints(mesh, unknown), InvalidArgument);
  const std::vector<BoundaryCondition> no_ramp{BoundaryCondition::axial("top", Axis::z, 0.001, 0.0)};
  CHECK_THROWS_AS(DofConstraints(mesh, no_ramp), InvalidArgument);
}

TEST_CASE("inverted elements are reported with index and time") {
  const auto mesh = generate_box_mesh({0.002, 0.001, 0.001}, {2, 1, 1});
  const std::vector<BoundaryCondition> none;
  const ExplicitModel model(mesh, kTable2, SimConfig{}, none);
  auto x = mesh.nodes();
  for (std::size_t a : mesh.element(1)) {
    if (x[a].z() > 0.0005 && x[a].x() > 0.0015) x[a].z() = -0.002;
  }
  try {
    (void)model.internal_forces(x, 0.25);
    FAIL("inversion not detected");
  } catch (const ElementInversion& e) {
    CHECK(e.element() == 2);
    CHECK(e.time() == 0.25);
  }
}

TEST_CASE("simulation configuration validation") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  for (auto bad : {+[](SimConfig& s) { s.dt_safety = 1.5; }, +[](SimConfig& s) { s.dt_safety = 0.0; },
                   +[](SimConfig& s) { s.density = -1.0; }, +[](SimConfig& s) { s.mass_scaling = 0.5; },
                   +[](SimConfig& s) { s.rate_scaling = 0.0; }, +[](SimConfig& s) { s.hourglass_coefficient = -0.1; },
                   +[](SimConfig& s) { s.output_interval = 0.0; }}) {
    SimConfig s;
    bad(s);
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
  }
  const std::vector<BoundaryCondition> none;
  CHECK_THROWS_AS(run_simulation(unit_cube(), none, SimConfig{}, kTable2), InvalidArgument);
}
