#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tissuefit/calibration.hpp"
#include "tissuefit/config.hpp"
#include "tissuefit/constitutive.hpp"
#include "tissuefit/dynamics.hpp"
#include "tissuefit/errors.hpp"
#include "tissuefit/mesh.hpp"
#include "tissuefit/scenario.hpp"

namespace py = pybind11;
using namespace tissuefit;

namespace {

ForceDisplacementCurve to_curve(const std::vector<double>& d, const std::vector<double>& f) {
  ForceDisplacementCurve c{d, f};
  c.validate();
  return c;
}

py::dict curve_dict(const ForceDisplacementCurve& c) {
  py::dict out;
  out["displacement"] = c.displacement;
  out["force"] = c.force;
  return out;
}

CurveData curve_data(TestKind kind, const std::vector<double>& d, const std::vector<double>& f, double height) {
  CurveData data;
  data.curve = to_curve(d, f);
  data.spec = homogeneous_spec(kind, 0.0, height);
  for (double x : d)
    if (std::abs(x) > std::abs(data.spec.target_displacement)) data.spec.target_displacement = x;
  return data;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ogden soft-tissue virtual testing and calibration";

  auto base = py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  auto state = py::register_exception<InvalidState>(m, "InvalidState", PyExc_RuntimeError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
  py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);
  (void)state;

  py::class_<OgdenParams>(m, "OgdenParams")
      .def(py::init<double, double, double>(), py::arg("mu"), py::arg("alpha"), py::arg("nu") = kDefaultPoissonRatio)
      .def_property_readonly("mu", &OgdenParams::mu)
      .def_property_readonly("alpha", &OgdenParams::alpha)
      .def_property_readonly("nu", &OgdenParams::nu)
      .def_property_readonly("bulk_modulus", &OgdenParams::bulk_modulus)
      .def_property_readonly("compressibility", &OgdenParams::compressibility)
      .def("__repr__", [](const OgdenParams& p) {
        return "OgdenParams(mu=" + std::to_string(p.mu()) + ", alpha=" + std::to_string(p.alpha()) +
               ", nu=" + std::to_string(p.nu()) + ")";
      });

  m.def("strain_energy", [](const Mat3& f, const OgdenParams& p) { return strain_energy(DeformationGradient(f), p); },
        py::arg("F"), py::arg("params"), "Strain energy density, J/m^3");
  m.def("cauchy_stress", [](const Mat3& f, const OgdenParams& p) { return cauchy_stress(DeformationGradient(f), p).cauchy; },
        py::arg("F"), py::arg("params"), "Cauchy stress, Pa");
  m.def("uniaxial_nominal_stress", &uniaxial_nominal_stress, py::arg("stretch"), py::arg("mu"), py::arg("alpha"));
  m.def("nominal_strain", &nominal_strain, py::arg("displacement"), py::arg("sample_height"));
  m.def("smooth_step", &smooth_step, py::arg("xi"));

  py::class_<HexMesh>(m, "HexMesh")
      .def_property_readonly("node_count", &HexMesh::node_count)
      .def_property_readonly("element_count", &HexMesh::element_count)
      .def_property_readonly("nodes", [](const HexMesh& mesh) {
        Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> x(mesh.node_count(), 3);
        for (std::size_t i = 0; i < mesh.node_count(); ++i) x.row(static_cast<Eigen::Index>(i)) = mesh.node(i);
        return x;
      })
      .def_property_readonly("elements", &HexMesh::elements)
      .def_property_readonly("node_sets", &HexMesh::node_sets)
      .def_property_readonly("element_sets", &HexMesh::element_sets)
      .def("volume", &HexMesh::volume)
      .def("serialize", [](const HexMesh& mesh) { return serialize_mesh(mesh); });

  m.def("generate_box_mesh", &generate_box_mesh, py::arg("lengths"), py::arg("divisions"));
  m.def("parse_mesh", &parse_mesh_string, py::arg("text"));
  m.def("read_mesh_file", &read_mesh_file, py::arg("path"));
  m.def("write_mesh_file", &write_mesh_file, py::arg("mesh"), py::arg("path"));
  m.def("mesh_quality", [](const HexMesh& mesh) {
    const auto q = mesh_quality(mesh);
    py::dict out;
    out["nodes"] = q.node_count;
    out["elements"] = q.element_count;
    out["mean_jacobian"] = q.mesh_mean_jacobian;
    out["min_corner_jacobian"] = q.min_corner_jacobian;
    out["flagged_elements"] = q.flagged_elements;
    return out;
  }, py::arg("mesh"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("density", &SimConfig::density)
      .def_readwrite("dt_safety", &SimConfig::dt_safety)
      .def_readwrite("hourglass_coefficient", &SimConfig::hourglass_coefficient)
      .def_readwrite("mass_scaling", &SimConfig::mass_scaling)
      .def_readwrite("rate_scaling", &SimConfig::rate_scaling)
      .def_readwrite("output_interval", &SimConfig::output_interval)
      .def_readwrite("ke_ie_threshold", &SimConfig::ke_ie_threshold);

  m.def("stable_time_step", &stable_time_step, py::arg("mesh"), py::arg("params"), py::arg("config") = SimConfig{});

  m.def(
      "run_uniaxial",
      [](const HexMesh& mesh, const OgdenParams& p, double target_displacement, double sample_height,
         const SimConfig& cfg, bool laterally_free) {
        const auto kind = target_displacement >= 0.0 ? TestKind::tension : TestKind::compression;
        ExperimentSpec spec = homogeneous_spec(kind, target_displacement, sample_height);
        if (!laterally_free) {
          spec.lateral = LateralMode::bonded;
          spec.rollers.clear();
        }
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(spec, mesh, p, cfg);
        }
        py::dict out = curve_dict(r.curve);
        out["ke_ie_max"] = r.quasistatic.ke_ie_ratio;
        out["quasistatic"] = r.quasistatic.pass;
        out["hourglass_ie"] = r.solver.final_hg_ie();
        out["max_energy_balance_error"] = r.solver.max_balance_error;
        out["steps"] = r.solver.steps;
        return out;
      },
      py::arg("mesh"), py::arg("params"), py::arg("target_displacement"), py::arg("sample_height"),
      py::arg("config") = SimConfig{}, py::arg("laterally_free") = true,
      "Uniaxial tension (target > 0) or compression test; returns the base reaction curve.");

  m.def(
      "analytic_curve",
      [](const OgdenParams& p, double area, double height, const std::vector<double>& strains) {
        return curve_dict(analytic_curve(p, area, height, strains));
      },
      py::arg("params"), py::arg("area"), py::arg("height"), py::arg("strains"));

  m.def(
      "calibrate",
      [](py::object tension, py::object compression, double area, double height, double initial_mu,
         double initial_alpha, double strain_min, double strain_max, int restarts, std::uint64_t seed) {
        CalibrationProblem problem;
        if (!tension.is_none()) {
          const auto [d, f] = tension.cast<std::pair<std::vector<double>, std::vector<double>>>();
          problem.curves.push_back(curve_data(TestKind::tension, d, f, height));
        }
        if (!compression.is_none()) {
          const auto [d, f] = compression.cast<std::pair<std::vector<double>, std::vector<double>>>();
          problem.curves.push_back(curve_data(TestKind::compression, d, f, height));
        }
        problem.forward = analytic_forward(area);
        problem.initial_mu = initial_mu;
        problem.initial_alpha = initial_alpha;
        problem.strain_min = strain_min;
        problem.strain_max = strain_max;
        problem.settings.restarts = restarts;
        problem.settings.seed = seed;
        const auto r = calibrate(problem);
        py::dict out;
        out["mu"] = r.params.mu();
        out["alpha"] = r.params.alpha();
        out["objective"] = r.objective;
        out["initial_objective"] = r.initial_objective;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["ill_conditioned"] = r.ill_conditioned;
        out["mu_spread"] = r.mu_spread;
        out["alpha_spread"] = r.alpha_spread;
        return out;
      },
      py::arg("tension") = py::none(), py::arg("compression") = py::none(), py::arg("area"), py::arg("height"),
      py::arg("initial_mu") = 500.0, py::arg("initial_alpha") = -2.0, py::arg("strain_min") = -0.3,
      py::arg("strain_max") = 0.2, py::arg("restarts") = 3, py::arg("seed") = 1,
      "Fit (mu, alpha) to (displacement, force) curves with the closed-form forward model.");
}
