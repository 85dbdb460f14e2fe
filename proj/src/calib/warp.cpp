#include "pals/calib/warp.hpp"

#include <algorithm>
#include <cmath>

namespace pals {

double sample_trilinear(const ScalarField& field, const Vec3& p) {
  const GridSpec& g = field.grid();
  if (!g.contains(p)) return 0.0;
  int i0[3];
  double w[3];
  for (int a = 0; a < 3; ++a) {
    const int n = g.dim(a);
    double f = std::clamp((p[a] - g.origin()[a]) / g.spacing()[a] - 0.5, 0.0, static_cast<double>(n - 1));
    // Snap round-off so that sampling at a voxel center returns that voxel.
    if (std::abs(f - std::round(f)) < 1e-9) f = std::round(f);
    int i = static_cast<int>(std::floor(f));
    if (i >= n - 1) i = n - 2;
    i0[a] = i;
    w[a] = f - i;
  }
  double v = 0.0;
  for (int dk = 0; dk < 2; ++dk) {
    for (int dj = 0; dj < 2; ++dj) {
      for (int di = 0; di < 2; ++di) {
        const double wt = (di ? w[0] : 1.0 - w[0]) * (dj ? w[1] : 1.0 - w[1]) * (dk ? w[2] : 1.0 - w[2]);
        if (wt != 0.0) v += wt * field.at(i0[0] + di, i0[1] + dj, i0[2] + dk);
      }
    }
  }
  return v;
}

ScalarField warp_field(const ScalarField& field, const RigidTransform& t) {
  const GridSpec& g = field.grid();
  std::vector<double> out(g.voxel_count());
  for (int k = 0; k < g.dim(2); ++k) {
    for (int j = 0; j < g.dim(1); ++j) {
      for (int i = 0; i < g.dim(0); ++i) {
        out[g.index(i, j, k)] = sample_trilinear(field, t.inverse(g.center(i, j, k)));
      }
    }
  }
  return ScalarField(g, std::move(out));
}

}  // namespace pals
