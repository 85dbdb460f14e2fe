#pragma once

#include <span>
#include <vector>

#include "pals/forward/dip.hpp"

namespace pals {

inline constexpr double kSilhouetteFloor = 0.05;

/// No-fill silhouette: an n1 x n2 image (x-fastest) seen along the third axis.
struct SilhouetteExperiment {
  AcquisitionParams acq;
  std::vector<double> observed;
  double eta = 50.0;
};

/// First strictly increasing run of the ray, starting at the first value
/// above `floor`. Empty when no value exceeds the floor.
std::vector<int> sfs_boundary_run(std::span<const double> ray, double floor = kSilhouetteFloor);

struct SoftmaxVote {
  double value = 0.0;
  std::vector<double> d_value;  // d value / d ray[run[n]]
};

/// Softmax-weighted mean of ray values over `run` with sharpness eta; 0 for an empty run.
SoftmaxVote softmax_vote(std::span<const double> ray, std::span<const int> run, double eta);

/// Image of a gridded field under the no-fill model.
std::vector<double> sfs_image(std::span<const double> u, const GridSpec& grid, double eta);

ForwardResult sfs_forward(const ExtendedParameters& m, const GridSpec& grid, int experiment, double eta,
                          const FieldOptions& options = {}, bool want_jacobian = false);
ForwardResult sfs_forward(const GridFieldEvaluator& rotated, const ExtendedParameters& m, int experiment, double eta,
                          bool want_jacobian);

}  // namespace pals
