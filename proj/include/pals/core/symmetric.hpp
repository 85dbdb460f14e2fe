#pragma once

#include <array>

#include <Eigen/Core>

#include "pals/core/types.hpp"

namespace pals {

/// Packed lower-triangle order shared by B, L and tril_select:
/// (0,0) (1,0) (2,0) (1,1) (2,1) (2,2).
inline constexpr std::array<std::array<int, 2>, 6> kLowerEntries{{{0, 0}, {1, 0}, {2, 0}, {1, 1}, {2, 1}, {2, 2}}};
/// Positions of kLowerEntries inside a column-stacked 3x3 matrix.
inline constexpr std::array<int, 6> kLowerVecRows{0, 1, 2, 4, 5, 8};

/// The 9x6 matrix P with vec(B) = P [B1..B6] for symmetric B.
Eigen::Matrix<double, 9, 6> duplication_matrix();

/// Rows of a column-stacked 3x3 at the lower-triangular indices.
Vec6 tril_select(const Vec9& v9);
Eigen::Matrix<double, 6, Eigen::Dynamic> tril_select_rows(const Eigen::Matrix<double, 9, Eigen::Dynamic>& m);

Vec9 vec(const Mat3& m);
Mat3 unpack_symmetric(const Vec6& packed);
Mat3 unpack_lower(const Vec6& packed);
Vec6 pack_lower(const Mat3& m);

}  // namespace pals
