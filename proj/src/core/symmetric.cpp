#include "pals/core/symmetric.hpp"

namespace pals {

Eigen::Matrix<double, 9, 6> duplication_matrix() {
  Eigen::Matrix<double, 9, 6> p = Eigen::Matrix<double, 9, 6>::Zero();
  for (int k = 0; k < 6; ++k) {
    const int r = kLowerEntries[static_cast<std::size_t>(k)][0];
    const int c = kLowerEntries[static_cast<std::size_t>(k)][1];
    p(r + 3 * c, k) = 1.0;
    p(c + 3 * r, k) = 1.0;
  }
  return p;
}

Vec6 tril_select(const Vec9& v9) {
  Vec6 out;
  for (int k = 0; k < 6; ++k) out[k] = v9[kLowerVecRows[static_cast<std::size_t>(k)]];
  return out;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> tril_select_rows(const Eigen::Matrix<double, 9, Eigen::Dynamic>& m) {
  Eigen::Matrix<double, 6, Eigen::Dynamic> out(6, m.cols());
  for (int k = 0; k < 6; ++k) out.row(k) = m.row(kLowerVecRows[static_cast<std::size_t>(k)]);
  return out;
}

Vec9 vec(const Mat3& m) { return Eigen::Map<const Vec9>(m.data()); }

Mat3 unpack_symmetric(const Vec6& packed) {
  Mat3 m;
  for (int k = 0; k < 6; ++k) {
    const int r = kLowerEntries[static_cast<std::size_t>(k)][0];
    const int c = kLowerEntries[static_cast<std::size_t>(k)][1];
    m(r, c) = packed[k];
    m(c, r) = packed[k];
  }
  return m;
}

Mat3 unpack_lower(const Vec6& packed) {
  Mat3 m = Mat3::Zero();
  for (int k = 0; k < 6; ++k) {
    m(kLowerEntries[static_cast<std::size_t>(k)][0], kLowerEntries[static_cast<std::size_t>(k)][1]) = packed[k];
  }
  return m;
}

Vec6 pack_lower(const Mat3& m) { return tril_select(vec(m)); }

}  // namespace pals
