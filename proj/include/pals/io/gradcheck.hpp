#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pals {

struct GradcheckFamilyReport {
  std::string family;
  int trials = 0;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  int skipped_columns = 0;  // columns whose +-h probe crossed a non-smooth point
  bool passed = false;
};

struct GradcheckReport {
  std::vector<GradcheckFamilyReport> families;
  bool passed() const;
};

/// field-spherical, field-ellipsoid, field-cholesky, rot-params, rot-acq,
/// dip, sfs, pointcloud, barrier.
const std::vector<std::string>& gradcheck_families();
double gradcheck_default_tolerance(const std::string& family);

/// Analytic Jacobians against central differences (step 1e-5 times
/// max(1, |parameter|)) at `trials` random configurations. `family` may be
/// "all"; tolerance <= 0 selects the family default. ConfigError for unknown names.
GradcheckReport gradcheck(const std::string& family, int trials = 5, double tolerance = 0.0, std::uint64_t seed = 1);

}  // namespace pals
