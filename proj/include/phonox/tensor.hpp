#pragma once

#include <Eigen/Dense>

#include <array>

namespace phonox {

using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Vec3 = Eigen::Vector3d;

// Voigt index map used throughout:
//   1 = xx, 2 = yy, 3 = zz, 4 = yz, 5 = xz, 6 = xy   (zero-based 0..5 in code)
// Strains are engineering strains (S4 = 2 e_yz, ...). With that convention the
// stiffness, piezoelectric and photoelastic full-index tensors are obtained from
// their Voigt matrices without any factors: c_ijkl = c_IJ, e_ikl = e_iJ,
// p_ijkl = p_IJ.

/// Zero-based Voigt index of the symmetric pair (i, j).
constexpr int voigt_index(int i, int j) {
  if (i == j) return i;
  const int s = i + j;  // (1,2)->3 (yz), (0,2)->2 (xz), (0,1)->1 (xy)
  return s == 3 ? 3 : (s == 2 ? 4 : 5);
}

/// Representative index pair for a zero-based Voigt index.
constexpr std::array<int, 2> voigt_pair(int I) {
  constexpr std::array<std::array<int, 2>, 6> pairs{{{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};
  return pairs[static_cast<std::size_t>(I)];
}

/// Proper rotation mapping crystal-frame components to device-frame
/// components: v_device = R * v_crystal.
class CrystalOrientation {
 public:
  CrystalOrientation() : r_(Mat3::Identity()) {}
  /// Validates orthogonality and det = +1 within 1e-12; throws ValidationError.
  explicit CrystalOrientation(const Mat3& r);

  static CrystalOrientation identity() { return CrystalOrientation(); }
  /// Right-handed rotation of the material by `radians` about a device axis (0,1,2).
  static CrystalOrientation about_axis(int axis, double radians);
  /// Composition: apply `first`, then `second`.
  static CrystalOrientation compose(const CrystalOrientation& second, const CrystalOrientation& first);

  const Mat3& matrix() const { return r_; }
  bool is_identity() const { return r_ == Mat3::Identity(); }

 private:
  Mat3 r_;
};

Mat6 rotate_rank4_voigt(const Mat6& c, const Mat3& r);
Mat36 rotate_rank3_voigt(const Mat36& e, const Mat3& r);
Mat3 rotate_rank2(const Mat3& t, const Mat3& r);

}  // namespace phonox
