#include "phonox/tensor.hpp"

#include "phonox/error.hpp"

#include <cmath>

namespace phonox {

namespace {

using Rank4 = std::array<double, 81>;
using Rank3 = std::array<double, 27>;

constexpr int idx4(int i, int j, int k, int l) { return ((i * 3 + j) * 3 + k) * 3 + l; }
constexpr int idx3(int i, int j, int k) { return (i * 3 + j) * 3 + k; }

Rank4 expand(const Mat6& c) {
  Rank4 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) t[idx4(i, j, k, l)] = c(voigt_index(i, j), voigt_index(k, l));
  return t;
}

Mat6 contract(const Rank4& t) {
  Mat6 c;
  for (int I = 0; I < 6; ++I)
    for (int J = 0; J < 6; ++J) {
      const auto p = voigt_pair(I);
      const auto q = voigt_pair(J);
      c(I, J) = t[idx4(p[0], p[1], q[0], q[1])];
    }
  return c;
}

}  // namespace

CrystalOrientation::CrystalOrientation(const Mat3& r) : r_(r) {
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho <= 1e-12) || !(std::abs(r.determinant() - 1.0) <= 1e-12))
    throw ValidationError("crystal orientation is not a proper rotation (R^T R != I or det != 1)");
}

CrystalOrientation CrystalOrientation::about_axis(int axis, double radians) {
  if (axis < 0 || axis > 2) throw ValidationError("rotation axis must be 0, 1 or 2");
  const Vec3 a = Vec3::Unit(axis);
  return CrystalOrientation(Eigen::AngleAxisd(radians, a).toRotationMatrix());
}

CrystalOrientation CrystalOrientation::compose(const CrystalOrientation& second,
                                               const CrystalOrientation& first) {
  Mat3 r = second.matrix() * first.matrix();
  // re-orthonormalize to keep the 1e-12 invariant under long chains
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = svd.matrixU() * svd.matrixV().transpose();
  return CrystalOrientation(r);
}

Mat6 rotate_rank4_voigt(const Mat6& c, const Mat3& r) {
  const Rank4 t = expand(c);
  // contract one index at a time: four passes of 3^5 work instead of 3^8
  Rank4 a{}, b{};
  for (int i = 0; i < 3; ++i)
    for (int q = 0; q < 3; ++q)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0;
          for (int p = 0; p < 3; ++p) s += r(i, p) * t[idx4(p, q, k, l)];
          a[idx4(i, q, k, l)] = s;
        }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0;
          for (int q = 0; q < 3; ++q) s += r(j, q) * a[idx4(i, q, k, l)];
          b[idx4(i, j, k, l)] = s;
        }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0;
          for (int m = 0; m < 3; ++m) s += r(k, m) * b[idx4(i, j, m, l)];
          a[idx4(i, j, k, l)] = s;
        }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0;
          for (int n = 0; n < 3; ++n) s += r(l, n) * a[idx4(i, j, k, n)];
          b[idx4(i, j, k, l)] = s;
        }
  return contract(b);
}

Mat36 rotate_rank3_voigt(const Mat36& e, const Mat3& r) {
  Rank3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) t[idx3(i, j, k)] = e(i, voigt_index(j, k));
  Rank3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        double s = 0;
        for (int p = 0; p < 3; ++p)
          for (int q = 0; q < 3; ++q)
            for (int m = 0; m < 3; ++m) s += r(i, p) * r(j, q) * r(k, m) * t[idx3(p, q, m)];
        out[idx3(i, j, k)] = s;
      }
  Mat36 res;
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 6; ++J) {
      const auto q = voigt_pair(J);
      res(i, J) = out[idx3(i, q[0], q[1])];
    }
  return res;
}

Mat3 rotate_rank2(const Mat3& t, const Mat3& r) { return r * t * r.transpose(); }

}  // namespace phonox
