#include "pals/io/phantom.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pals/calib/rotation.hpp"
#include "pals/core/errors.hpp"

namespace pals {

Phantom::Phantom(std::string name, std::vector<EllipsoidPrimitive> ellipsoids, std::vector<BoxPrimitive> boxes)
    : name_(std::move(name)), ellipsoids_(std::move(ellipsoids)), boxes_(std::move(boxes)) {
  if (ellipsoids_.empty() && boxes_.empty()) throw ConfigError("phantom: empty primitive list");
  for (const auto& e : ellipsoids_) {
    if (!(e.axes.minCoeff() > 0.0)) throw ConfigError("phantom: ellipsoid axes must be positive");
  }
  for (const auto& b : boxes_) {
    if (!(b.half.minCoeff() > 0.0)) throw ConfigError("phantom: box half-sizes must be positive");
  }
}

Phantom Phantom::named(const std::string& name, const GridSpec& domain) {
  const Vec3 mid = domain.midpoint();
  const double s = domain.extent().minCoeff() / GridSpec::kDefaultExtent;
  if (name == "sphere") return Phantom(name, {{mid, Vec3::Constant(1.2 * s)}});
  if (name == "ellipsoid") {
    return Phantom(name, {{mid, Vec3(1.8, 1.3, 1.0) * s, rotation_matrix(0.4, 0.3)}});
  }
  if (name == "nonconvex") {
    // A U-shaped union: two upright lobes joined by a horizontal bar.
    return Phantom(name, {{mid + Vec3(-0.9, 0.0, 0.35) * s, Vec3(0.5, 0.55, 1.15) * s},
                          {mid + Vec3(0.9, 0.0, 0.35) * s, Vec3(0.5, 0.55, 1.15) * s},
                          {mid + Vec3(0.0, 0.0, -0.75) * s, Vec3(1.45, 0.55, 0.45) * s}});
  }
  if (name == "cube") {
    return Phantom(name, {}, {{mid, 0.5 * domain.extent() + Vec3::Constant(1e-9)}});
  }
  throw ConfigError("unknown phantom '" + name + "' (expected sphere, ellipsoid, nonconvex or cube)");
}

namespace {

double ellipsoid_implicit(const EllipsoidPrimitive& e, const Vec3& p) {
  const Vec3 local = e.rotation.transpose() * (p - e.center);
  return local.cwiseQuotient(e.axes).squaredNorm();
}

double ellipsoid_distance(const EllipsoidPrimitive& e, const Vec3& p) {
  const Vec3 local = e.rotation.transpose() * (p - e.center);
  if (e.axes.maxCoeff() == e.axes.minCoeff()) return local.norm() - e.axes[0];
  // f = |local/axes| - 1 divided by |grad f|.
  const Vec3 scaled = local.cwiseQuotient(e.axes);
  const double k = scaled.norm();
  if (k == 0.0) return -e.axes.minCoeff();
  const Vec3 grad = scaled.cwiseQuotient(e.axes) / k;
  return (k - 1.0) / grad.norm();
}

double box_distance(const BoxPrimitive& b, const Vec3& p) {
  const Vec3 q = (p - b.center).cwiseAbs() - b.half;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

}  // namespace

bool Phantom::contains(const Vec3& p) const {
  for (const auto& e : ellipsoids_) {
    if (ellipsoid_implicit(e, p) <= 1.0) return true;
  }
  for (const auto& b : boxes_) {
    if (((p - b.center).cwiseAbs() - b.half).maxCoeff() <= 0.0) return true;
  }
  return false;
}

double Phantom::signed_distance(const Vec3& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& e : ellipsoids_) d = std::min(d, ellipsoid_distance(e, p));
  for (const auto& b : boxes_) d = std::min(d, box_distance(b, p));
  return d;
}

double Phantom::volume() const {
  double v = 0.0;
  for (const auto& e : ellipsoids_) v += 4.0 / 3.0 * std::numbers::pi * e.axes.prod();
  for (const auto& b : boxes_) v += 8.0 * b.half.prod();
  return v;
}

std::vector<SurfaceSample> Phantom::sample_surface(std::size_t n, std::mt19937_64& rng) const {
  std::vector<double> area;
  for (const auto& e : ellipsoids_) {
    // Knud Thomsen's approximation of the ellipsoid surface area.
    const double p = 1.6075;
    const double a = std::pow(e.axes[0], p), b = std::pow(e.axes[1], p), c = std::pow(e.axes[2], p);
    area.push_back(4.0 * std::numbers::pi * std::pow((a * b + a * c + b * c) / 3.0, 1.0 / p));
  }
  for (const auto& bx : boxes_) {
    area.push_back(8.0 * (bx.half[0] * bx.half[1] + bx.half[1] * bx.half[2] + bx.half[0] * bx.half[2]));
  }
  std::discrete_distribution<std::size_t> pick(area.begin(), area.end());
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SurfaceSample> out;
  out.reserve(n);
  std::size_t guard = 0;
  while (out.size() < n) {
    if (++guard > 1000 * n + 1000) throw NumericalError("phantom: surface sampling found no exposed surface");
    const std::size_t which = pick(rng);
    SurfaceSample s;
    if (which < ellipsoids_.size()) {
      const auto& e = ellipsoids_[which];
      Vec3 d(gauss(rng), gauss(rng), gauss(rng));
      if (d.norm() < 1e-12) continue;
      d.normalize();
      s.point = e.center + e.rotation * e.axes.cwiseProduct(d);
      s.normal = (e.rotation * d.cwiseQuotient(e.axes)).normalized();
      // Thin the non-uniform direction sampling towards area-uniform.
      const double jac = e.axes.prod() * d.cwiseQuotient(e.axes).norm();
      if (unit(rng) * e.axes.prod() / e.axes.minCoeff() > jac) continue;
    } else {
      const auto& b = boxes_[which - ellipsoids_.size()];
      const double faces[3] = {b.half[1] * b.half[2], b.half[0] * b.half[2], b.half[0] * b.half[1]};
      std::discrete_distribution<int> face_pick(faces, faces + 3);
      const int axis = face_pick(rng);
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      Vec3 local;
      for (int a = 0; a < 3; ++a) local[a] = (2.0 * unit(rng) - 1.0) * b.half[a];
      local[axis] = sign * b.half[axis];
      s.point = b.center + local;
      s.normal = Vec3::Zero();
      s.normal[axis] = sign;
    }
    // Keep only boundary points of the union.
    bool covered = false;
    for (std::size_t e = 0; e < ellipsoids_.size() && !covered; ++e) {
      if (e != which && ellipsoid_implicit(ellipsoids_[e], s.point) < 1.0) covered = true;
    }
    for (std::size_t b = 0; b < boxes_.size() && !covered; ++b) {
      if (ellipsoids_.size() + b != which && ((s.point - boxes_[b].center).cwiseAbs() - boxes_[b].half).maxCoeff() < 0.0) {
        covered = true;
      }
    }
    if (!covered) out.push_back(s);
  }
  return out;
}

ScalarField voxelize(const Phantom& phantom, const GridSpec& grid) {
  return voxelize(phantom, grid, [](const Vec3& p) { return p; });
}

ScalarField voxelize(const Phantom& phantom, const GridSpec& grid, const std::function<Vec3(const Vec3&)>& to_phantom) {
  std::vector<double> v(grid.voxel_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = phantom.contains(to_phantom(grid.center(i))) ? 1.0 : 0.0;
  return ScalarField(grid, std::move(v));
}

ScalarField downsample(const ScalarField& field, int factor) {
  const GridSpec& g = field.grid();
  if (factor < 1) throw ConfigError("downsample: factor must be >= 1");
  for (int a = 0; a < 3; ++a) {
    if (g.dim(a) % factor != 0) throw ConfigError("downsample: factor does not divide the grid dimensions");
  }
  const GridSpec lo({g.dim(0) / factor, g.dim(1) / factor, g.dim(2) / factor}, g.origin(), g.extent());
  std::vector<double> out(lo.voxel_count(), 0.0);
  for (int k = 0; k < g.dim(2); ++k) {
    for (int j = 0; j < g.dim(1); ++j) {
      for (int i = 0; i < g.dim(0); ++i) out[lo.index(i / factor, j / factor, k / factor)] += field.at(i, j, k);
    }
  }
  const double inv = 1.0 / (static_cast<double>(factor) * factor * factor);
  for (double& v : out) v *= inv;
  return ScalarField(lo, std::move(out));
}

}  // namespace pals
