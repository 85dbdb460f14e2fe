#include "pals/io/formats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

#include "pals/core/errors.hpp"
#include "pals/solver/reconstruct.hpp"

namespace pals {

using nlohmann::json;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(what + ": invalid JSON (" + e.what() + ")");
  }
}

template <class T>
T get_field(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw ConfigError(what + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(what + ": bad value for '" + key + "' (" + e.what() + ")");
  }
}

json acq_to_json(const AcquisitionParams& a) { return {{"theta", a.theta}, {"phi", a.phi}, {"b", {a.b[0], a.b[1], a.b[2]}}}; }

AcquisitionParams acq_from_json(const json& j, const std::string& what) {
  const auto b = get_field<std::vector<double>>(j, "b", what);
  if (b.size() != 3) throw ConfigError(what + ": 'b' must have three entries");
  return {get_field<double>(j, "theta", what), get_field<double>(j, "phi", what), Vec3(b[0], b[1], b[2])};
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(what + ": cannot parse number '" + s + "'");
  }
  if (used != s.size()) throw ConfigError(what + ": trailing characters in '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

void atomic_write(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::random_device rd;
  const fs::path tmp = path.string() + ".tmp" + std::to_string(rd());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) {
      fs::remove(tmp);
      throw ConfigError("write to '" + tmp.string() + "' failed");
    }
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_voxel_grid(const fs::path& base, const ScalarField& field, VoxelDtype dtype) {
  const GridSpec& g = field.grid();
  const fs::path raw_path = fs::path(base.string() + ".raw");
  std::string payload;
  if (dtype == VoxelDtype::f32) {
    payload.resize(field.size() * 4);
    for (std::size_t i = 0; i < field.size(); ++i) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(field[i]));
      for (int b = 0; b < 4; ++b) payload[4 * i + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
  } else {
    payload.resize(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
      const double v = std::clamp(field[i], 0.0, 1.0);
      payload[i] = static_cast<char>(static_cast<std::uint8_t>(std::lround(255.0 * v)));
    }
  }
  const json header = {{"dims", {g.dim(0), g.dim(1), g.dim(2)}},
                       {"origin", {g.origin()[0], g.origin()[1], g.origin()[2]}},
                       {"extent", {g.extent()[0], g.extent()[1], g.extent()[2]}},
                       {"dtype", dtype == VoxelDtype::f32 ? "f32" : "u8"},
                       {"order", "x-fastest"},
                       {"raw", raw_path.filename().string()}};
  atomic_write(raw_path, payload);
  atomic_write(fs::path(base.string() + ".json"), header.dump(2) + "\n");
}

ScalarField read_voxel_grid(const fs::path& path) {
  fs::path base = path;
  if (base.extension() == ".json" || base.extension() == ".raw") base.replace_extension();
  const std::string what = "voxel grid '" + base.string() + "'";
  const json h = parse_json(read_file(fs::path(base.string() + ".json")), what);
  const auto dims = get_field<std::vector<int>>(h, "dims", what);
  const auto origin = get_field<std::vector<double>>(h, "origin", what);
  const auto extent = get_field<std::vector<double>>(h, "extent", what);
  const auto dtype = get_field<std::string>(h, "dtype", what);
  if (h.contains("order") && h.at("order") != "x-fastest") throw ConfigError(what + ": only x-fastest order is supported");
  if (dims.size() != 3 || origin.size() != 3 || extent.size() != 3) throw ConfigError(what + ": dims/origin/extent need 3 entries");
  const GridSpec g({dims[0], dims[1], dims[2]}, Vec3(origin[0], origin[1], origin[2]), Vec3(extent[0], extent[1], extent[2]));
  const std::string payload = read_file(fs::path(base.string() + ".raw"));
  std::vector<double> v(g.voxel_count());
  if (dtype == "f32") {
    if (payload.size() != 4 * v.size()) throw ConfigError(what + ": payload size does not match dims");
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(payload[4 * i + static_cast<std::size_t>(b)])) << (8 * b);
      }
      v[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
  } else if (dtype == "u8") {
    if (payload.size() != v.size()) throw ConfigError(what + ": payload size does not match dims");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<unsigned char>(payload[i]) / 255.0;
  } else {
    throw ConfigError(what + ": unknown dtype '" + dtype + "'");
  }
  return ScalarField(g, std::move(v));
}

void write_dip_csv(const fs::path& path, const std::vector<DipExperiment>& dips) {
  std::ostringstream os;
  const std::size_t n = dips.empty() ? 0 : dips.front().observed.size();
  os << "theta_deg,phi_deg,bx,by,bz";
  for (std::size_t k = 1; k <= n; ++k) os << ",v_" << k;
  os << "\n";
  for (const DipExperiment& d : dips) {
    if (d.observed.size() != n) throw ContractError("dip csv: traces differ in length");
    os << fmt17(d.acq.theta * kDeg) << ',' << fmt17(d.acq.phi * kDeg) << ',' << fmt17(d.acq.b[0]) << ','
       << fmt17(d.acq.b[1]) << ',' << fmt17(d.acq.b[2]);
    for (double v : d.observed) os << ',' << fmt17(v);
    os << "\n";
  }
  atomic_write(path, os.str());
}

std::vector<DipExperiment> read_dip_csv(const fs::path& path) {
  const std::string what = "dip csv '" + path.string() + "'";
  std::istringstream is(read_file(path));
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(what + ": empty file");
  const std::vector<std::string> header = split(strip_cr(line), ',');
  if (header.size() < 6 || header[0] != "theta_deg" || header[1] != "phi_deg" || header[2] != "bx" ||
      header[3] != "by" || header[4] != "bz") {
    throw ConfigError(what + ": header must start with theta_deg,phi_deg,bx,by,bz and list v_1..v_n");
  }
  const std::size_t n = header.size() - 5;
  std::vector<DipExperiment> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    const std::string where = what + " line " + std::to_string(line_no);
    if (cells.size() != header.size()) throw ConfigError(where + ": expected " + std::to_string(header.size()) + " columns");
    DipExperiment d;
    d.acq.theta = parse_double(cells[0], where) / kDeg;
    d.acq.phi = parse_double(cells[1], where) / kDeg;
    for (int a = 0; a < 3; ++a) d.acq.b[a] = parse_double(cells[static_cast<std::size_t>(2 + a)], where);
    d.observed.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      d.observed[k] = parse_double(cells[5 + k], where);
      if (!(d.observed[k] >= 0.0)) throw ConfigError(where + ": slice volumes must be >= 0");
    }
    out.push_back(std::move(d));
  }
  if (out.empty()) throw ConfigError(what + ": no dips");
  return out;
}

void write_silhouettes(const fs::path& manifest, const std::vector<SilhouetteExperiment>& experiments, int n1, int n2) {
  json list = json::array();
  const fs::path dir = manifest.parent_path();
  const std::string stem = manifest.stem().string();
  for (std::size_t e = 0; e < experiments.size(); ++e) {
    const SilhouetteExperiment& s = experiments[e];
    if (s.observed.size() != static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2)) {
      throw ContractError("silhouette image size does not match n1 x n2");
    }
    char name[64];
    std::snprintf(name, sizeof name, "%s_%03zu.pgm", stem.c_str(), e);
    std::string pgm = "P5\n" + std::to_string(n1) + " " + std::to_string(n2) + "\n255\n";
    for (double v : s.observed) pgm.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)))));
    atomic_write(dir / name, pgm);
    json entry = acq_to_json(s.acq);
    entry["file"] = name;
    entry["eta"] = s.eta;
    list.push_back(entry);
  }
  const json m = {{"dims", {n1, n2}}, {"experiments", list}};
  atomic_write(manifest, m.dump(2) + "\n");
}

namespace {

std::vector<double> read_pgm(const fs::path& path, int n1, int n2) {
  const std::string what = "pgm '" + path.string() + "'";
  const std::string data = read_file(path);
  std::istringstream is(data);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  is >> magic;
  auto skip_comments = [&] {
    is >> std::ws;
    while (is.peek() == '#') {
      std::string c;
      std::getline(is, c);
      is >> std::ws;
    }
  };
  skip_comments();
  is >> w;
  skip_comments();
  is >> h;
  skip_comments();
  is >> maxval;
  if (magic != "P5" || !is || maxval != 255) throw ConfigError(what + ": expected binary P5 with maxval 255");
  if (w != n1 || h != n2) throw ConfigError(what + ": image size does not match the manifest");
  is.get();
  const std::size_t start = static_cast<std::size_t>(is.tellg());
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() < start + n) throw ConfigError(what + ": truncated payload");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<unsigned char>(data[start + i]) / 255.0;
  return v;
}

}  // namespace

std::vector<SilhouetteExperiment> read_silhouettes(const fs::path& manifest, int* n1_out, int* n2_out) {
  const std::string what = "silhouette manifest '" + manifest.string() + "'";
  const json m = parse_json(read_file(manifest), what);
  const auto dims = get_field<std::vector<int>>(m, "dims", what);
  if (dims.size() != 2 || dims[0] < 1 || dims[1] < 1) throw ConfigError(what + ": dims must be [n1, n2]");
  std::vector<SilhouetteExperiment> out;
  for (const json& e : get_field<json>(m, "experiments", what)) {
    SilhouetteExperiment s;
    s.acq = acq_from_json(e, what);
    s.eta = get_field<double>(e, "eta", what);
    s.observed = read_pgm(manifest.parent_path() / get_field<std::string>(e, "file", what), dims[0], dims[1]);
    out.push_back(std::move(s));
  }
  if (n1_out) *n1_out = dims[0];
  if (n2_out) *n2_out = dims[1];
  return out;
}

void write_point_cloud(const fs::path& path, const PointCloudData& cloud, const AcquisitionParams& pose) {
  std::ostringstream os;
  os << "# pose " << fmt17(pose.theta) << ' ' << fmt17(pose.phi) << ' ' << fmt17(pose.b[0]) << ' ' << fmt17(pose.b[1])
     << ' ' << fmt17(pose.b[2]) << "\n";
  os << "# eps_offset " << fmt17(cloud.eps_offset) << "\n";
  os << "# level " << fmt17(cloud.level) << "\n";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const Vec3& n = cloud.normals[i];
    os << fmt17(p[0]) << ' ' << fmt17(p[1]) << ' ' << fmt17(p[2]) << ' ' << fmt17(n[0]) << ' ' << fmt17(n[1]) << ' '
       << fmt17(n[2]) << "\n";
  }
  atomic_write(path, os.str());
}

PointCloudFile read_point_cloud(const fs::path& path) {
  const std::string what = "point cloud '" + path.string() + "'";
  std::istringstream is(read_file(path));
  PointCloudFile out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "pose") {
        ls >> out.pose.theta >> out.pose.phi >> out.pose.b[0] >> out.pose.b[1] >> out.pose.b[2];
      } else if (key == "eps_offset") {
        ls >> out.cloud.eps_offset;
      } else if (key == "level") {
        ls >> out.cloud.level;
      }
      if (!ls && (key == "pose" || key == "eps_offset" || key == "level")) {
        throw ConfigError(what + " line " + std::to_string(line_no) + ": malformed '" + key + "' comment");
      }
      continue;
    }
    Vec3 p, n;
    std::string rest;
    ls >> p[0] >> p[1] >> p[2] >> n[0] >> n[1] >> n[2];
    if (!ls || (ls >> rest)) throw ConfigError(what + " line " + std::to_string(line_no) + ": expected 'x y z nx ny nz'");
    out.cloud.points.push_back(p);
    out.cloud.normals.push_back(n);
  }
  out.cloud.validate();
  return out;
}

std::string params_to_json(const ExtendedParameters& m, const FieldOptions* field) {
  json acq = json::array();
  for (const AcquisitionParams& a : m.acq) acq.push_back(acq_to_json(a));
  const Eigen::VectorXd& flat = m.pals.flat();
  json j = {{"kind", std::string(kind_name(m.pals.kind()))},
                  {"eps_norm", m.pals.eps_norm()},
                  {"n_rbf", m.pals.size()},
                  {"params", std::vector<double>(flat.data(), flat.data() + flat.size())},
                  {"acquisition", acq}};
  if (field) {
    j["field"] = {{"delta", field->heaviside.delta},
                  {"eps", field->heaviside.eps},
                  {"offset", field->heaviside.offset},
                  {"wendland_order", static_cast<int>(field->order)}};
  }
  return j.dump(2) + "\n";
}

ExtendedParameters params_from_json(std::string_view text) {
  const std::string what = "parameter file";
  const json j = parse_json(text, what);
  const BasisKind kind = kind_from_name(get_field<std::string>(j, "kind", what));
  const double eps = j.contains("eps_norm") ? get_field<double>(j, "eps_norm", what) : kDefaultEpsNorm;
  const auto flat = get_field<std::vector<double>>(j, "params", what);
  if (flat.size() % static_cast<std::size_t>(basis_stride(kind)) != 0) {
    throw ConfigError(what + ": params length is not a multiple of the basis stride");
  }
  ExtendedParameters m(ParameterVector::from_flat(kind, flat, eps));
  if (j.contains("acquisition")) {
    for (const json& a : j.at("acquisition")) m.acq.push_back(acq_from_json(a, what));
  }
  return m;
}

std::optional<FieldOptions> field_options_from_json(std::string_view text) {
  const std::string what = "parameter file";
  const json j = parse_json(text, what);
  if (!j.contains("field")) return std::nullopt;
  const json& f = j.at("field");
  FieldOptions o;
  o.heaviside.delta = get_field<double>(f, "delta", what);
  o.heaviside.eps = get_field<double>(f, "eps", what);
  o.heaviside.offset = get_field<double>(f, "offset", what);
  const int order = get_field<int>(f, "wendland_order", what);
  if (order < 0 || order > 3) throw ConfigError(what + ": wendland_order must be 0..3");
  o.order = static_cast<WendlandOrder>(order);
  o.heaviside.validate();
  return o;
}

void write_params(const fs::path& path, const ExtendedParameters& m, const FieldOptions* field) {
  atomic_write(path, params_to_json(m, field));
}

ExtendedParameters read_params(const fs::path& path) { return params_from_json(read_file(path)); }

std::string trace_to_csv(const OptimizationTrace& trace) {
  std::ostringstream os;
  os << "iter,misfit,reg,n_rbf,step\n";
  for (const TraceRecord& r : trace.records) {
    os << r.iter << ',' << fmt17(r.misfit) << ',' << fmt17(r.reg) << ',' << r.n_rbf << ',' << fmt17(r.step) << "\n";
  }
  return os.str();
}

}  // namespace pals
