#include "pals/cli/run_config.hpp"

#include <set>

#include "json.hpp"
#include "pals/core/errors.hpp"
#include "pals/io/formats.hpp"

namespace pals::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": bad value for '" + key + "'");
  }
}

Vec3 read_vec3(const json& j, const char* key, Vec3 fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  std::vector<double> v;
  read(j, key, v, where);
  if (v.size() != 3) throw ConfigError(where + ": '" + key + "' needs three entries");
  return {v[0], v[1], v[2]};
}

GridConfig read_grid(const json& j, GridConfig g, const std::string& where) {
  reject_unknown(j, {"dims", "origin", "extent"}, where);
  if (j.contains("dims")) {
    if (j.at("dims").is_number_integer()) {
      const int n = j.at("dims").get<int>();
      g.dims = {n, n, n};
    } else {
      std::vector<int> d;
      read(j, "dims", d, where);
      if (d.size() != 3) throw ConfigError(where + ": 'dims' needs three entries");
      g.dims = {d[0], d[1], d[2]};
    }
  }
  g.origin = read_vec3(j, "origin", g.origin, where);
  g.extent = read_vec3(j, "extent", g.extent, where);
  return g;
}

json grid_json(const GridConfig& g) {
  return {{"dims", {g.dims[0], g.dims[1], g.dims[2]}},
          {"origin", {g.origin[0], g.origin[1], g.origin[2]}},
          {"extent", {g.extent[0], g.extent[1], g.extent[2]}}};
}

std::string modality_string(SimModality m) {
  switch (m) {
    case SimModality::dip:
      return "dip";
    case SimModality::silhouette:
      return "sfs";
    case SimModality::point_cloud:
      return "pc";
  }
  return "dip";
}

}  // namespace

SimModality sim_modality_from_name(const std::string& s);

SimModality sim_modality_from_name(const std::string& s) {
  if (s == "dip") return SimModality::dip;
  if (s == "sfs") return SimModality::silhouette;
  if (s == "pc") return SimModality::point_cloud;
  throw ConfigError("unknown modality '" + s + "' (expected dip, sfs or pc)");
}

FieldOptions RunConfig::field_options() const {
  HeavisideConfig h{delta, eps, 0.0};
  if (zero_background) h = HeavisideConfig::zero_background(delta, eps);
  return {h, order};
}

void RunConfig::validate() const {
  field_options().heaviside.validate();
  if (!(eps_norm > 0.0)) throw ConfigError("eps_norm must be positive");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  (void)grid.spec();
  (void)grid_hi.spec();
  gn.validate();
  schedule.validate();
  noise.validate();
  if (simulation.n_experiments < 1) throw ConfigError("simulation.n_experiments must be >= 1");
  if (!(simulation.eta > 0.0)) throw ConfigError("simulation.eta must be positive");
  if (simulation.n_points < 1) throw ConfigError("simulation.n_points must be >= 1");
  if (!(simulation.translation_box >= 0.0)) throw ConfigError("simulation.translation_box must be >= 0");
  if (!(simulation.level > 0.0 && simulation.level < 1.0)) throw ConfigError("simulation.level must lie in (0,1)");
  if (calibration_start < 1) throw ConfigError("calibration_start must be >= 1");
  if (!(calibration_prior >= 0.0)) throw ConfigError("calibration_prior must be >= 0");
  if (silhouette_start < 1) throw ConfigError("silhouette_start must be >= 1");
  if (gamma.kind == GammaMode::Kind::fixed && !(gamma.gamma > 0.0)) throw ConfigError("gamma must be positive or \"auto\"");
}

RunConfig parse_run_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: invalid JSON (") + e.what() + ")");
  }
  const std::string w = "run config";
  reject_unknown(j, {"seed", "threads", "basis", "wendland_order", "heaviside", "eps_norm", "grid", "grid_hi", "gn",
                     "schedule", "noise", "phantom", "simulation", "inputs", "gamma", "estimate_calibration", "calibration_start", "calibration_prior", "silhouette_start"},
                 w);
  RunConfig c;
  read(j, "seed", c.seed, w);
  read(j, "threads", c.threads, w);
  if (j.contains("basis")) {
    std::string k;
    read(j, "basis", k, w);
    c.basis = kind_from_name(k);
  }
  if (j.contains("wendland_order")) {
    int o = 1;
    read(j, "wendland_order", o, w);
    if (o < 0 || o > 3) throw ConfigError(w + ": 'wendland_order' must be 0..3");
    c.order = static_cast<WendlandOrder>(o);
  }
  read(j, "eps_norm", c.eps_norm, w);
  read(j, "phantom", c.phantom, w);
  read(j, "estimate_calibration", c.estimate_calibration, w);
  read(j, "calibration_start", c.calibration_start, w);
  read(j, "calibration_prior", c.calibration_prior, w);
  read(j, "silhouette_start", c.silhouette_start, w);
  if (j.contains("heaviside")) {
    const json& h = j.at("heaviside");
    reject_unknown(h, {"delta", "eps", "zero_background"}, w + ".heaviside");
    read(h, "delta", c.delta, w);
    read(h, "eps", c.eps, w);
    read(h, "zero_background", c.zero_background, w);
  }
  if (j.contains("grid")) c.grid = read_grid(j.at("grid"), c.grid, w + ".grid");
  if (j.contains("grid_hi")) c.grid_hi = read_grid(j.at("grid_hi"), c.grid_hi, w + ".grid_hi");
  if (j.contains("gn")) {
    const json& g = j.at("gn");
    const std::string wg = w + ".gn";
    reject_unknown(g, {"it_gn", "lambda0", "lambda_decay", "armijo_c", "armijo_shrink", "armijo_max", "barrier_weight"}, wg);
    read(g, "it_gn", c.gn.it_gn, wg);
    read(g, "lambda0", c.gn.lambda0, wg);
    read(g, "lambda_decay", c.gn.lambda_decay, wg);
    read(g, "armijo_c", c.gn.armijo_c, wg);
    read(g, "armijo_shrink", c.gn.armijo_shrink, wg);
    read(g, "armijo_max", c.gn.armijo_max, wg);
    read(g, "barrier_weight", c.gn.barrier_weight, wg);
  }
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    const std::string ws = w + ".schedule";
    reject_unknown(s, {"p0", "p", "outer_iters", "init_radius", "add_radius", "min_spacing_cells", "binarize_threshold"}, ws);
    read(s, "p0", c.schedule.p0, ws);
    read(s, "p", c.schedule.p, ws);
    read(s, "outer_iters", c.schedule.outer_iters, ws);
    read(s, "init_radius", c.schedule.init_radius, ws);
    read(s, "add_radius", c.schedule.add_radius, ws);
    read(s, "min_spacing_cells", c.schedule.min_spacing_cells, ws);
    read(s, "binarize_threshold", c.schedule.binarize_threshold, ws);
  }
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    const std::string wn = w + ".noise";
    reject_unknown(n, {"data_sigma_voxels", "angle_sigma_deg", "trans_frac", "seed"}, wn);
    read(n, "data_sigma_voxels", c.noise.data_sigma_voxels, wn);
    read(n, "angle_sigma_deg", c.noise.angle_sigma_deg, wn);
    read(n, "trans_frac", c.noise.trans_frac, wn);
    read(n, "seed", c.noise.seed, wn);
  }
  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    const std::string ws = w + ".simulation";
    reject_unknown(s, {"modality", "n_experiments", "translation_box", "eta", "n_points", "eps_offset", "level"}, ws);
    if (s.contains("modality")) {
      std::string m;
      read(s, "modality", m, ws);
      c.simulation.modality = sim_modality_from_name(m);
    }
    read(s, "n_experiments", c.simulation.n_experiments, ws);
    read(s, "translation_box", c.simulation.translation_box, ws);
    read(s, "eta", c.simulation.eta, ws);
    read(s, "n_points", c.simulation.n_points, ws);
    read(s, "eps_offset", c.simulation.eps_offset, ws);
    read(s, "level", c.simulation.level, ws);
  }
  if (j.contains("inputs")) {
    const json& in = j.at("inputs");
    const std::string wi = w + ".inputs";
    reject_unknown(in, {"dip", "sfs", "pc"}, wi);
    if (in.contains("dip") && !in.at("dip").is_null()) {
      std::string s;
      read(in, "dip", s, wi);
      c.inputs.dip = s;
    }
    if (in.contains("sfs") && !in.at("sfs").is_null()) {
      std::string s;
      read(in, "sfs", s, wi);
      c.inputs.sfs = s;
    }
    if (in.contains("pc")) {
      if (in.at("pc").is_string()) {
        c.inputs.pc = {in.at("pc").get<std::string>()};
      } else {
        read(in, "pc", c.inputs.pc, wi);
      }
    }
  }
  if (j.contains("gamma")) {
    const json& g = j.at("gamma");
    if (g.is_string() && g.get<std::string>() == "auto") {
      c.gamma = GammaMode::automatic();
    } else if (g.is_number()) {
      c.gamma = GammaMode::fixed(g.get<double>());
    } else {
      throw ConfigError(w + ": 'gamma' must be \"auto\" or a positive number");
    }
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

std::string run_config_to_json(const RunConfig& c) {
  json inputs = json::object();
  inputs["dip"] = c.inputs.dip ? json(*c.inputs.dip) : json(nullptr);
  inputs["sfs"] = c.inputs.sfs ? json(*c.inputs.sfs) : json(nullptr);
  inputs["pc"] = c.inputs.pc;
  const json j = {
      {"seed", c.seed},
      {"threads", c.threads},
      {"basis", std::string(kind_name(c.basis))},
      {"wendland_order", static_cast<int>(c.order)},
      {"heaviside", {{"delta", c.delta}, {"eps", c.eps}, {"zero_background", c.zero_background}}},
      {"eps_norm", c.eps_norm},
      {"grid", grid_json(c.grid)},
      {"grid_hi", grid_json(c.grid_hi)},
      {"gn",
       {{"it_gn", c.gn.it_gn},
        {"lambda0", c.gn.lambda0},
        {"lambda_decay", c.gn.lambda_decay},
        {"armijo_c", c.gn.armijo_c},
        {"armijo_shrink", c.gn.armijo_shrink},
        {"armijo_max", c.gn.armijo_max},
        {"barrier_weight", c.gn.barrier_weight}}},
      {"schedule",
       {{"p0", c.schedule.p0},
        {"p", c.schedule.p},
        {"outer_iters", c.schedule.outer_iters},
        {"init_radius", c.schedule.init_radius},
        {"add_radius", c.schedule.add_radius},
        {"min_spacing_cells", c.schedule.min_spacing_cells},
        {"binarize_threshold", c.schedule.binarize_threshold}}},
      {"noise",
       {{"data_sigma_voxels", c.noise.data_sigma_voxels},
        {"angle_sigma_deg", c.noise.angle_sigma_deg},
        {"trans_frac", c.noise.trans_frac},
        {"seed", c.noise.seed}}},
      {"phantom", c.phantom},
      {"simulation",
       {{"modality", modality_string(c.simulation.modality)},
        {"n_experiments", c.simulation.n_experiments},
        {"translation_box", c.simulation.translation_box},
        {"eta", c.simulation.eta},
        {"n_points", c.simulation.n_points},
        {"eps_offset", c.simulation.eps_offset},
        {"level", c.simulation.level}}},
      {"inputs", inputs},
      {"gamma", c.gamma.kind == GammaMode::Kind::automatic ? json("auto") : json(c.gamma.gamma)},
      {"estimate_calibration", c.estimate_calibration},
      {"calibration_start", c.calibration_start},
      {"calibration_prior", c.calibration_prior},
      {"silhouette_start", c.silhouette_start}};
  return j.dump(2) + "\n";
}

}  // namespace pals::cli
