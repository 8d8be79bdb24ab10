#include "tissuefit/config.hpp"

#include "tissuefit/errors.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace tissuefit {

using nlohmann::json;

const char* to_string(LengthUnit u) noexcept { return u == LengthUnit::mm ? "mm" : "m"; }

LengthUnit parse_length_unit(const std::string& s) {
  if (s == "m") return LengthUnit::m;
  if (s == "mm") return LengthUnit::mm;
  throw InvalidArgument("unknown length unit '" + s + "' (expected m or mm)");
}

double unit_scale(LengthUnit u) noexcept { return u == LengthUnit::mm ? 1e-3 : 1.0; }

const char* to_string(ForwardKind k) noexcept { return k == ForwardKind::fe ? "fe" : "analytic"; }

ForwardKind parse_forward_kind(const std::string& s) {
  if (s == "analytic") return ForwardKind::analytic;
  if (s == "fe") return ForwardKind::fe;
  throw InvalidArgument("unknown forward model '" + s + "' (expected analytic or fe)");
}

namespace {

// Division keeps exactly representable millimetre values correctly rounded.
double to_metres(double v, LengthUnit u) { return u == LengthUnit::mm ? v / 1000.0 : v; }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw InvalidArgument(where + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw InvalidArgument("unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(where + "." + key + " has the wrong type");
  }
}

}  // namespace

void RunConfig::validate() const {
  (void)params();
  sim.validate();
  if (!mesh.path.empty()) {
    if (!std::filesystem::exists(mesh.path)) throw InvalidArgument("mesh file not found: " + mesh.path);
  } else {
    for (int i = 0; i < 3; ++i) {
      if (!(mesh.lengths[static_cast<std::size_t>(i)] > 0.0)) {
        throw InvalidArgument("mesh.box.lengths must be positive");
      }
      if (mesh.divisions[static_cast<std::size_t>(i)] < 1) throw InvalidArgument("mesh.box.divisions must be >= 1");
    }
  }
  if (!(experiment.loading_speed > 0.0)) throw InvalidArgument("experiment.loading_speed must be positive");
  if (experiment.sample_height < 0.0) throw InvalidArgument("experiment.sample_height must be positive");
  if (!(calibration.strain_min < calibration.strain_max)) {
    throw InvalidArgument("calibration strain window lower bound must be below upper bound");
  }
  if (calibration.points_per_curve < 2) throw InvalidArgument("calibration.points_per_curve must be >= 2");
  if (calibration.restarts < 1) throw InvalidArgument("calibration.restarts must be >= 1");
  if (calibration.max_iterations < 1) throw InvalidArgument("calibration.max_iterations must be >= 1");
  if (!(calibration.x_tolerance > 0.0) || !(calibration.f_tolerance > 0.0)) {
    throw InvalidArgument("calibration tolerances must be positive");
  }
}

RunConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc, "config", {"units", "material", "sim", "experiment", "mesh", "calibration"});

  RunConfig cfg;
  std::string units = "m";
  read(doc, "units", "config", units);
  cfg.units = parse_length_unit(units);
  const LengthUnit u = cfg.units;

  if (doc.contains("material")) {
    const auto& m = doc["material"];
    check_keys(m, "material", {"mu", "alpha", "nu"});
    read(m, "mu", "material", cfg.mu);
    read(m, "alpha", "material", cfg.alpha);
    read(m, "nu", "material", cfg.nu);
  }

  if (doc.contains("sim")) {
    const auto& s = doc["sim"];
    check_keys(s, "sim", {"density", "dt_safety", "hourglass_coefficient", "rate_scaling", "mass_scaling",
                          "output_interval", "ke_ie_threshold"});
    read(s, "density", "sim", cfg.sim.density);
    read(s, "dt_safety", "sim", cfg.sim.dt_safety);
    read(s, "hourglass_coefficient", "sim", cfg.sim.hourglass_coefficient);
    read(s, "rate_scaling", "sim", cfg.sim.rate_scaling);
    read(s, "mass_scaling", "sim", cfg.sim.mass_scaling);
    read(s, "output_interval", "sim", cfg.sim.output_interval);
    read(s, "ke_ie_threshold", "sim", cfg.sim.ke_ie_threshold);
  }

  if (doc.contains("experiment")) {
    const auto& e = doc["experiment"];
    check_keys(e, "experiment",
               {"kind", "loading_speed", "target_displacement", "sample_height", "axis", "lateral", "sets", "rollers"});
    auto& x = cfg.experiment;
    std::string text;
    if (e.contains("kind")) {
      read(e, "kind", "experiment", text);
      x.kind = parse_test_kind(text);
    }
    if (e.contains("axis")) {
      read(e, "axis", "experiment", text);
      x.axis = parse_axis(text);
    }
    if (e.contains("lateral")) {
      read(e, "lateral", "experiment", text);
      x.lateral = parse_lateral_mode(text);
    }
    double v = x.loading_speed;
    if (e.contains("loading_speed")) {
      read(e, "loading_speed", "experiment", v);
      v = to_metres(v, u);
    }
    x.loading_speed = v;
    v = 0.0;
    read(e, "target_displacement", "experiment", v);
    x.target_displacement = to_metres(v, u);
    v = 0.0;
    read(e, "sample_height", "experiment", v);
    x.sample_height = to_metres(v, u);
    if (e.contains("sets")) {
      const auto& s = e["sets"];
      check_keys(s, "experiment.sets", {"base", "load", "tracked"});
      read(s, "base", "experiment.sets", x.base_set);
      read(s, "load", "experiment.sets", x.load_set);
      read(s, "tracked", "experiment.sets", x.tracked_set);
    }
    if (e.contains("rollers")) {
      if (!e["rollers"].is_array()) throw InvalidArgument("experiment.rollers must be an array");
      for (const auto& r : e["rollers"]) {
        check_keys(r, "experiment.rollers[]", {"set", "axis"});
        RollerSet roller;
        std::string axis;
        read(r, "set", "experiment.rollers[]", roller.node_set);
        read(r, "axis", "experiment.rollers[]", axis);
        if (roller.node_set.empty()) throw InvalidArgument("experiment.rollers[] needs a set");
        roller.axis = parse_axis(axis);
        x.rollers.push_back(roller);
      }
    }
  }

  if (doc.contains("mesh")) {
    const auto& m = doc["mesh"];
    check_keys(m, "mesh", {"path", "box"});
    if (m.contains("path") == m.contains("box")) throw InvalidArgument("mesh needs exactly one of path or box");
    if (m.contains("path")) {
      read(m, "path", "mesh", cfg.mesh.path);
      std::filesystem::path p(cfg.mesh.path);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      cfg.mesh.path = p.lexically_normal().string();
    } else {
      const auto& b = m["box"];
      check_keys(b, "mesh.box", {"lengths", "divisions"});
      std::array<double, 3> lengths{};
      read(b, "lengths", "mesh.box", lengths);
      read(b, "divisions", "mesh.box", cfg.mesh.divisions);
      for (std::size_t i = 0; i < 3; ++i) cfg.mesh.lengths[i] = to_metres(lengths[i], u);
    }
  } else {
    throw InvalidArgument("config needs a mesh section");
  }

  if (doc.contains("calibration")) {
    const auto& c = doc["calibration"];
    check_keys(c, "calibration", {"strain_window", "points_per_curve", "initial_guess", "restarts", "seed",
                                  "max_iterations", "x_tolerance", "f_tolerance", "forward"});
    auto& k = cfg.calibration;
    if (c.contains("strain_window")) {
      std::array<double, 2> w{};
      read(c, "strain_window", "calibration", w);
      k.strain_min = w[0];
      k.strain_max = w[1];
    }
    if (c.contains("initial_guess")) {
      const auto& g = c["initial_guess"];
      check_keys(g, "calibration.initial_guess", {"mu", "alpha"});
      read(g, "mu", "calibration.initial_guess", k.initial_mu);
      read(g, "alpha", "calibration.initial_guess", k.initial_alpha);
    }
    read(c, "points_per_curve", "calibration", k.points_per_curve);
    read(c, "restarts", "calibration", k.restarts);
    read(c, "seed", "calibration", k.seed);
    read(c, "max_iterations", "calibration", k.max_iterations);
    read(c, "x_tolerance", "calibration", k.x_tolerance);
    read(c, "f_tolerance", "calibration", k.f_tolerance);
    if (c.contains("forward")) {
      std::string f;
      read(c, "forward", "calibration", f);
      k.forward = parse_forward_kind(f);
    }
  }

  cfg.units = LengthUnit::m;
  cfg.validate();
  cfg.units = u;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(text.str(), dir.empty() ? "." : dir.string());
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["units"] = "m";
  doc["material"] = {{"mu", cfg.mu}, {"alpha", cfg.alpha}, {"nu", cfg.nu}};
  doc["sim"] = {{"density", cfg.sim.density},
                {"dt_safety", cfg.sim.dt_safety},
                {"hourglass_coefficient", cfg.sim.hourglass_coefficient},
                {"rate_scaling", cfg.sim.rate_scaling},
                {"mass_scaling", cfg.sim.mass_scaling},
                {"output_interval", cfg.sim.output_interval},
                {"ke_ie_threshold", cfg.sim.ke_ie_threshold}};
  const auto& x = cfg.experiment;
  json rollers = json::array();
  for (const auto& r : x.rollers) rollers.push_back({{"set", r.node_set}, {"axis", to_string(r.axis)}});
  doc["experiment"] = {{"kind", to_string(x.kind)},
                       {"loading_speed", x.loading_speed},
                       {"target_displacement", x.target_displacement},
                       {"sample_height", x.sample_height},
                       {"axis", to_string(x.axis)},
                       {"lateral", to_string(x.lateral)},
                       {"sets", {{"base", x.base_set}, {"load", x.load_set}, {"tracked", x.tracked_set}}},
                       {"rollers", rollers}};
  if (!cfg.mesh.path.empty()) {
    doc["mesh"] = {{"path", std::filesystem::absolute(cfg.mesh.path).lexically_normal().string()}};
  } else {
    doc["mesh"] = {{"box", {{"lengths", cfg.mesh.lengths}, {"divisions", cfg.mesh.divisions}}}};
  }
  const auto& k = cfg.calibration;
  doc["calibration"] = {{"strain_window", {k.strain_min, k.strain_max}},
                        {"points_per_curve", k.points_per_curve},
                        {"initial_guess", {{"mu", k.initial_mu}, {"alpha", k.initial_alpha}}},
                        {"restarts", k.restarts},
                        {"seed", k.seed},
                        {"max_iterations", k.max_iterations},
                        {"x_tolerance", k.x_tolerance},
                        {"f_tolerance", k.f_tolerance},
                        {"forward", to_string(k.forward)}};
  return doc.dump(2) + "\n";
}

HexMesh load_mesh(const RunConfig& cfg) {
  if (!cfg.mesh.path.empty()) return read_mesh_file(cfg.mesh.path);
  return generate_box_mesh(cfg.mesh.lengths, cfg.mesh.divisions);
}

ExperimentSpec resolved_experiment(const RunConfig& cfg, const HexMesh& mesh) {
  ExperimentSpec x = cfg.experiment;
  if (x.sample_height == 0.0) {
    const auto [lo, hi] = mesh.bounds();
    x.sample_height = hi[component(x.axis)] - lo[component(x.axis)];
  }
  x.validate(mesh);
  return x;
}

double cross_section_area(const HexMesh& mesh, Axis axis) {
  const auto [lo, hi] = mesh.bounds();
  const Vec3 ext = hi - lo;
  const int a = component(axis);
  return ext[(a + 1) % 3] * ext[(a + 2) % 3];
}

}  // namespace tissuefit
