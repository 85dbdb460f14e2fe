#pragma once

#include "pals/calib/rotation.hpp"
#include "pals/core/field.hpp"

namespace pals {

/// Trilinear sample of a gridded field at p; points outside the domain box read 0.
double sample_trilinear(const ScalarField& field, const Vec3& p);

/// Backward warp: out(x) = in(T^{-1}(x)).
ScalarField warp_field(const ScalarField& field, const RigidTransform& t);

}  // namespace pals
