#pragma once
/**
 * @file config.hpp
 * @brief scenario configuration: JSON parsing with defaults, validation and emission
 *
 * Missing keys take the half-circle defaults. Unknown keys, type mismatches
 * and constraint violations throw ConfigError naming the key path. Relative
 * file paths resolve against the config file's directory; the emitted config
 * holds absolute paths, so it re-parses to the same scenario from anywhere.
 */

#include "swopt/cli/bathymetry_io.hpp"
#include "swopt/mesh/generators.hpp"
#include "swopt/mesh/msh_io.hpp"
#include "swopt/optimizer/optimizer.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

namespace swopt {

using json = nlohmann::json;

struct MeshSpec {
  std::string file; ///< MSH 2.2; empty selects the generated half-circle bay
  meshgen::HalfCircleSpec half_circle;
};

struct BathymetrySpec {
  enum class Kind { Constant, Linear, Gaussian, Csv };
  Kind kind = Kind::Linear;
  double z0 = 0.5;              ///< constant value, intercept, or Gaussian base
  Vec2 gradient{0.0, -0.25};    ///< linear: z = z0 + gradient . x
  double amplitude = 1.0;       ///< gaussian: z = z0 + amplitude exp(-sharpness |x - center|^2)
  Vec2 center{0.4, 0.2};
  double sharpness = 6.0;
  std::string file;             ///< csv

  double at(const Point& x) const {
    switch (kind) {
      case Kind::Constant: return z0;
      case Kind::Linear: return z0 + gradient.dot(x);
      case Kind::Gaussian: return z0 + amplitude * std::exp(-sharpness * (x - center).squaredNorm());
      case Kind::Csv: break;
    }
    throw ConfigError("bathymetry: csv kind has no analytic value");
  }
};

/// free surface level + amplitude exp(-sharpness |x - center|^2), fluid at rest
struct InitialSpec {
  double level = 1.0;
  double amplitude = 1.0;
  Vec2 center{0.0, 1.0};
  double sharpness = 15.0;

  double surface(const Point& x) const { return level + amplitude * std::exp(-sharpness * (x - center).squaredNorm()); }
};

struct GradcheckSpec {
  int fields = 3;
  double fd_step = 6e-5; ///< FD step in length units; fields are scaled to max |V| = 1
  ShapeForm form = ShapeForm::Weak;
};

struct ScenarioConfig {
  MeshSpec mesh;
  int order = 1;
  BathymetrySpec bathymetry;
  InitialSpec initial;
  SWEParams swe;
  double newton_abs_tol = 1e-6; ///< accepted for compatibility; stepping is not Newton-based
  double newton_rel_tol = 1e-5;
  double open_sea_level = 1.0;
  TimeControl time{2.5, 5e-3, TimeScheme::SSPRK2};
  Vec3 objective_C{1.0, 1.0, 1.0};
  Vec3 target{1.0, 0.0, 0.0};
  PenaltyParams penalties;
  ElasticityParams elasticity;
  OptimizerParams optimizer;
  GradcheckSpec gradcheck;
  std::string output_dir = "out";
  int snapshot_stride = 0; ///< 0: first and last only
  unsigned seed = 1;
  int threads = 1;

  void validate() const {
    if (order != 1 && order != 2) throw ConfigError("order: must be 1 or 2");
    swe.validate();
    if (!(time.T > 0.0)) throw ConfigError("time.T: must be > 0");
    if (!(time.dt_max > 0.0)) throw ConfigError("time.dt: must be > 0");
    if (!(objective_C.minCoeff() >= 0.0)) throw ConfigError("objective.C: entries must be >= 0");
    penalties.validate();
    elasticity.validate();
    optimizer.validate();
    if (gradcheck.fields < 1) throw ConfigError("gradcheck.fields: must be >= 1");
    if (!(gradcheck.fd_step > 0.0)) throw ConfigError("gradcheck.fd_step: must be > 0");
    if (snapshot_stride < 0) throw ConfigError("output.snapshot_stride: must be >= 0");
    if (threads < 1) throw ConfigError("threads: must be >= 1");
    if (output_dir.empty()) throw ConfigError("output.dir: must not be empty");
    if (!(newton_abs_tol > 0.0 && newton_rel_tol > 0.0)) throw ConfigError("solver: tolerances must be > 0");
    if (!mesh.file.empty() && !std::filesystem::exists(mesh.file))
      throw ConfigError("mesh.file: no such file " + mesh.file);
    if (bathymetry.kind == BathymetrySpec::Kind::Csv && !std::filesystem::exists(bathymetry.file))
      throw ConfigError("bathymetry.file: no such file " + bathymetry.file);
  }

  ObjectiveWeights weights() const {
    ObjectiveWeights w;
    w.C = objective_C;
    const State t = target;
    w.target = [t](double, const Point&) { return t; };
    return w;
  }
};

namespace detail {

/// typed access to one JSON object that records which keys were read
class ObjectReader {
public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(at(key) + ": expected a number");
    return v->get<double>();
  }

  int integer(const std::string& key, int def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(at(key) + ": expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(at(key) + ": expected a string");
    return v->get<std::string>();
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vec(const std::string& key, const Eigen::Matrix<double, N, 1>& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_array() || v->size() != N) throw ConfigError(at(key) + ": expected an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
      if (!(*v)[i].is_number()) throw ConfigError(at(key) + ": expected an array of " + std::to_string(N) + " numbers");
      out[i] = (*v)[i].get<double>();
    }
    return out;
  }

  ObjectReader child(const std::string& key) {
    const json* v = find(key);
    static const json empty = json::object();
    return ObjectReader(v ? *v : empty, at(key));
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(at(it.key()) + ": unknown key");
  }

private:
  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline std::string resolve(const std::string& p, const std::filesystem::path& base) {
  if (p.empty()) return p;
  std::filesystem::path q(p);
  if (q.is_relative()) q = base / q;
  return std::filesystem::absolute(q).lexically_normal().string();
}

template <typename E>
E enum_value(const std::string& key, const std::string& s, std::initializer_list<std::pair<const char*, E>> names) {
  std::string options;
  for (const auto& [n, e] : names) {
    if (s == n) return e;
    options += std::string(options.empty() ? "" : ", ") + n;
  }
  throw ConfigError(key + ": expected one of " + options + ", got '" + s + "'");
}

inline json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline const char* bathymetry_kind_name(BathymetrySpec::Kind k) {
  switch (k) {
    case BathymetrySpec::Kind::Constant: return "constant";
    case BathymetrySpec::Kind::Linear: return "linear";
    case BathymetrySpec::Kind::Gaussian: return "gaussian";
    case BathymetrySpec::Kind::Csv: return "csv";
  }
  return "?";
}

} // namespace detail

/// validated config from a JSON document; relative paths resolve against base_dir
inline ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir = ".") {
  using detail::ObjectReader;
  ScenarioConfig c;
  ObjectReader root(doc, "");

  {
    ObjectReader m = root.child("mesh");
    c.mesh.file = detail::resolve(m.string("file", ""), base_dir);
    if (m.has("half_circle")) {
      if (!c.mesh.file.empty()) throw ConfigError("mesh: give either file or half_circle");
    }
    ObjectReader h = m.child("half_circle");
    auto& hs = c.mesh.half_circle;
    hs.radius = h.number("radius", hs.radius);
    hs.obstacle_center = h.vec<2>("obstacle_center", hs.obstacle_center);
    hs.obstacle_radius = h.number("obstacle_radius", hs.obstacle_radius);
    hs.h_near = h.number("h_near", hs.h_near);
    hs.h_far = h.number("h_far", hs.h_far);
    hs.grading = h.number("grading", hs.grading);
    hs.smoothing_passes = h.integer("smoothing_passes", hs.smoothing_passes);
    hs.seed = unsigned(h.integer("seed", int(hs.seed)));
    h.finish();
    if (!(hs.radius > 0 && hs.obstacle_radius > 0 && hs.h_near > 0 && hs.h_far >= hs.h_near && hs.grading > 0))
      throw ConfigError("mesh.half_circle: need radius, obstacle_radius, h_near, grading > 0 and h_far >= h_near");
    if (hs.smoothing_passes < 0) throw ConfigError("mesh.half_circle.smoothing_passes: must be >= 0");
    m.finish();
  }

  c.order = root.integer("order", c.order);

  {
    ObjectReader b = root.child("bathymetry");
    auto& bs = c.bathymetry;
    using K = BathymetrySpec::Kind;
    bs.kind = detail::enum_value<K>(b.at("kind"), b.string("kind", "linear"),
                                    {{"constant", K::Constant}, {"linear", K::Linear}, {"gaussian", K::Gaussian}, {"csv", K::Csv}});
    if (bs.kind == K::Gaussian) {
      bs.z0 = 0.0;
      bs.amplitude = 1.0;
    }
    if (bs.kind != K::Csv) bs.z0 = b.number("z0", bs.z0);
    if (bs.kind == K::Linear) bs.gradient = b.vec<2>("gradient", bs.gradient);
    if (bs.kind == K::Gaussian) {
      bs.amplitude = b.number("amplitude", bs.amplitude);
      bs.center = b.vec<2>("center", bs.center);
      bs.sharpness = b.number("sharpness", bs.sharpness);
      if (!(bs.sharpness >= 0.0)) throw ConfigError("bathymetry.sharpness: must be >= 0");
    }
    if (bs.kind == K::Csv) {
      bs.file = detail::resolve(b.string("file", ""), base_dir);
      if (bs.file.empty()) throw ConfigError("bathymetry.file: required for kind csv");
    }
    b.finish();
  }

  {
    ObjectReader i = root.child("initial");
    c.initial.level = i.number("level", c.initial.level);
    c.initial.amplitude = i.number("amplitude", c.initial.amplitude);
    c.initial.center = i.vec<2>("center", c.initial.center);
    c.initial.sharpness = i.number("sharpness", c.initial.sharpness);
    if (!(c.initial.sharpness >= 0.0)) throw ConfigError("initial.sharpness: must be >= 0");
    i.finish();
  }

  {
    ObjectReader s = root.child("swe");
    auto& p = c.swe;
    p.g = s.number("g", p.g);
    p.c_f = s.number("c_f", p.c_f);
    p.eps_f = s.vec<2>("eps_f", p.eps_f);
    p.C_IP = s.number("C_IP", p.C_IP);
    p.cfl = s.number("cfl", p.cfl);
    p.flux = detail::enum_value<FluxKind>(s.at("flux"), s.string("flux", to_string(p.flux)),
                                          {{"LLF", FluxKind::LLF}, {"HLLE", FluxKind::HLLE}});
    p.well_balanced = s.boolean("well_balanced", p.well_balanced);
    p.H_min = s.number("H_min", p.H_min);
    ObjectReader sen = s.child("sensor");
    p.sensor.s0 = sen.number("s0", p.sensor.s0);
    p.sensor.kappa = sen.number("kappa", p.sensor.kappa);
    p.sensor.eps_v_max = sen.number("eps_v_max", p.sensor.eps_v_max);
    sen.finish();
    s.finish();
  }

  {
    ObjectReader s = root.child("solver");
    c.newton_abs_tol = s.number("eps_abs", c.newton_abs_tol);
    c.newton_rel_tol = s.number("eps_rel", c.newton_rel_tol);
    s.finish();
  }

  c.open_sea_level = root.number("open_sea_level", c.open_sea_level);

  {
    ObjectReader t = root.child("time");
    c.time.T = t.number("T", c.time.T);
    c.time.dt_max = t.number("dt", c.time.dt_max);
    c.time.scheme = detail::enum_value<TimeScheme>(t.at("scheme"), t.string("scheme", to_string(c.time.scheme)),
                                                   {{"ForwardEuler", TimeScheme::ForwardEuler}, {"SSPRK2", TimeScheme::SSPRK2}});
    t.finish();
  }

  {
    ObjectReader o = root.child("objective");
    c.objective_C = o.vec<3>("C", c.objective_C);
    c.target = o.vec<3>("target", c.target);
    o.finish();
  }

  {
    ObjectReader p = root.child("penalties");
    auto& q = c.penalties;
    q.nu1 = p.number("nu1", q.nu1);
    q.nu2 = p.number("nu2", q.nu2);
    q.nu3 = p.number("nu3", q.nu3);
    q.d_min = p.number("d_min", q.d_min);
    q.ray_points = p.integer("ray_points", q.ray_points);
    q.edge_points = p.integer("edge_points", q.edge_points);
    p.finish();
  }

  {
    ObjectReader e = root.child("elasticity");
    c.elasticity.lambda = e.number("lambda", c.elasticity.lambda);
    c.elasticity.mu_min = e.number("mu_min", c.elasticity.mu_min);
    c.elasticity.mu_max = e.number("mu_max", c.elasticity.mu_max);
    e.finish();
  }

  {
    ObjectReader l = root.child("line_search");
    auto& ls = c.optimizer.line_search;
    ls.rho0 = l.number("rho0", ls.rho0);
    ls.shrink = l.number("shrink", ls.shrink);
    ls.max_halvings = l.integer("max_halvings", ls.max_halvings);
    l.finish();
  }

  {
    ObjectReader o = root.child("optimizer");
    c.optimizer.eps_stop = o.number("eps_stop", c.optimizer.eps_stop);
    c.optimizer.max_iters = o.integer("max_iters", c.optimizer.max_iters);
    o.finish();
  }

  {
    ObjectReader g = root.child("gradcheck");
    c.gradcheck.fields = g.integer("fields", c.gradcheck.fields);
    c.gradcheck.fd_step = g.number("fd_step", c.gradcheck.fd_step);
    c.gradcheck.form = detail::enum_value<ShapeForm>(g.at("form"), g.string("form", "weak"),
                                                     {{"weak", ShapeForm::Weak}, {"strong", ShapeForm::Strong}});
    g.finish();
  }

  {
    ObjectReader o = root.child("output");
    c.output_dir = detail::resolve(o.string("dir", c.output_dir), base_dir);
    c.snapshot_stride = o.integer("snapshot_stride", c.snapshot_stride);
    o.finish();
  }

  {
    const int seed = root.integer("seed", int(c.seed));
    if (seed < 0) throw ConfigError("seed: must be >= 0");
    c.seed = unsigned(seed);
  }
  c.threads = root.integer("threads", c.threads);
  root.finish();
  c.validate();
  return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc, std::filesystem::absolute(path).parent_path());
}

/// every field, so that parse_config(to_json(c)) == c
inline json to_json(const ScenarioConfig& c) {
  using detail::to_json;
  json j;
  const auto& hs = c.mesh.half_circle;
  if (c.mesh.file.empty())
    j["mesh"] = {{"half_circle",
                  {{"radius", hs.radius},
                   {"obstacle_center", to_json(hs.obstacle_center)},
                   {"obstacle_radius", hs.obstacle_radius},
                   {"h_near", hs.h_near},
                   {"h_far", hs.h_far},
                   {"grading", hs.grading},
                   {"smoothing_passes", hs.smoothing_passes},
                   {"seed", hs.seed}}}};
  else
    j["mesh"] = {{"file", c.mesh.file}};
  j["order"] = c.order;
  const auto& b = c.bathymetry;
  json bj = {{"kind", detail::bathymetry_kind_name(b.kind)}};
  switch (b.kind) {
    case BathymetrySpec::Kind::Constant: bj["z0"] = b.z0; break;
    case BathymetrySpec::Kind::Linear:
      bj["z0"] = b.z0;
      bj["gradient"] = to_json(b.gradient);
      break;
    case BathymetrySpec::Kind::Gaussian:
      bj["z0"] = b.z0;
      bj["amplitude"] = b.amplitude;
      bj["center"] = to_json(b.center);
      bj["sharpness"] = b.sharpness;
      break;
    case BathymetrySpec::Kind::Csv: bj["file"] = b.file; break;
  }
  j["bathymetry"] = bj;
  j["initial"] = {{"level", c.initial.level},
                  {"amplitude", c.initial.amplitude},
                  {"center", to_json(c.initial.center)},
                  {"sharpness", c.initial.sharpness}};
  const auto& p = c.swe;
  j["swe"] = {{"g", p.g},
              {"c_f", p.c_f},
              {"eps_f", to_json(p.eps_f)},
              {"C_IP", p.C_IP},
              {"cfl", p.cfl},
              {"flux", to_string(p.flux)},
              {"well_balanced", p.well_balanced},
              {"H_min", p.H_min},
              {"sensor", {{"s0", p.sensor.s0}, {"kappa", p.sensor.kappa}, {"eps_v_max", p.sensor.eps_v_max}}}};
  j["solver"] = {{"eps_abs", c.newton_abs_tol}, {"eps_rel", c.newton_rel_tol}};
  j["open_sea_level"] = c.open_sea_level;
  j["time"] = {{"T", c.time.T}, {"dt", c.time.dt_max}, {"scheme", to_string(c.time.scheme)}};
  j["objective"] = {{"C", to_json(c.objective_C)}, {"target", to_json(c.target)}};
  const auto& q = c.penalties;
  j["penalties"] = {{"nu1", q.nu1}, {"nu2", q.nu2},           {"nu3", q.nu3},
                    {"d_min", q.d_min}, {"ray_points", q.ray_points}, {"edge_points", q.edge_points}};
  j["elasticity"] = {{"lambda", c.elasticity.lambda}, {"mu_min", c.elasticity.mu_min}, {"mu_max", c.elasticity.mu_max}};
  const auto& ls = c.optimizer.line_search;
  j["line_search"] = {{"rho0", ls.rho0}, {"shrink", ls.shrink}, {"max_halvings", ls.max_halvings}};
  j["optimizer"] = {{"eps_stop", c.optimizer.eps_stop}, {"max_iters", c.optimizer.max_iters}};
  j["gradcheck"] = {{"fields", c.gradcheck.fields},
                    {"fd_step", c.gradcheck.fd_step},
                    {"form", c.gradcheck.form == ShapeForm::Weak ? "weak" : "strong"}};
  j["output"] = {{"dir", c.output_dir}, {"snapshot_stride", c.snapshot_stride}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

inline Mesh build_mesh(const ScenarioConfig& c) {
  if (!c.mesh.file.empty()) return load_msh(c.mesh.file);
  return meshgen::half_circle_with_obstacle(c.mesh.half_circle).mesh;
}

inline Bathymetry build_bathymetry(const ScenarioConfig& c, const Mesh& mesh) {
  if (c.bathymetry.kind == BathymetrySpec::Kind::Csv)
    return ingest_bathymetry(mesh, BathymetryScatter::load_csv(c.bathymetry.file));
  return Bathymetry::from_function(mesh, [&](const Point& x) { return c.bathymetry.at(x); });
}

/// initial state from the surface profile; height is surface minus the vertex-interpolated bed
template <int P>
DGField<P, 3> build_initial_state(const ScenarioConfig& c, const Mesh& mesh, const Bathymetry& b) {
  DGField<P, 3> U = project<P, 3>([&](const Point& x) { return State(c.initial.surface(x), 0.0, 0.0); }, mesh);
  U.axpy(-1.0, surface_offset<P>(mesh, b));
  return U;
}

template <int P>
Scenario<P> build_scenario(const ScenarioConfig& c) {
  Scenario<P> sc(build_mesh(c));
  sc.swe = c.swe;
  sc.bathymetry = build_bathymetry(c, sc.mesh);
  sc.open_sea_level = c.open_sea_level;
  sc.U0 = build_initial_state<P>(c, sc.mesh, sc.bathymetry);
  sc.time = c.time;
  sc.weights = c.weights();
  sc.penalties = c.penalties;
  sc.elasticity = c.elasticity;
  sc.optimizer = c.optimizer;
  return sc;
}

} // namespace swopt
