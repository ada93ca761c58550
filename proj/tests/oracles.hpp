#ifndef SCATUQ_TESTS_ORACLES_HPP_
#define SCATUQ_TESTS_ORACLES_HPP_

// Independent reference implementations used to freeze expected values in
// tests. These must not share code with the library paths they check.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

/// Direct Cox-de-Boor recursion with half-open indicator base case and
/// 0/0 treated as 0.
inline double naive_bspline(const std::vector<double>& knots, int p, int j,
                            double x) {
  if (p == 0) return (knots[j] <= x && x < knots[j + 1]) ? 1.0 : 0.0;
  double a = 0.0, b = 0.0;
  double d1 = knots[j + p] - knots[j];
  if (d1 > 0.0) a = (x - knots[j]) / d1 * naive_bspline(knots, p - 1, j, x);
  double d2 = knots[j + p + 1] - knots[j + 1];
  if (d2 > 0.0)
    b = (knots[j + p + 1] - x) / d2 * naive_bspline(knots, p - 1, j + 1, x);
  return a + b;
}

/// Direct rational tensor-product evaluation built on naive_bspline.
inline Eigen::Vector3d naive_nurbs_eval(
    const std::vector<double>& ku, const std::vector<double>& kv, int pu,
    int pv, const std::vector<Eigen::Vector3d>& cp,
    const std::vector<double>& w, double u, double v) {
  int n1 = static_cast<int>(ku.size()) - pu - 1;
  int n2 = static_cast<int>(kv.size()) - pv - 1;
  // close the right end for the indicator convention
  double ue = std::min(u, 1.0 - 1e-13), ve = std::min(v, 1.0 - 1e-13);
  Eigen::Vector3d num = Eigen::Vector3d::Zero();
  double den = 0.0;
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      double b = naive_bspline(ku, pu, i, ue) * naive_bspline(kv, pv, j, ve) *
                 w[j * n1 + i];
      num += b * cp[j * n1 + i];
      den += b;
    }
  }
  return num / den;
}

/// Scattered field of a sound-soft unit sphere under the plane wave
/// exp(i*kappa*z), evaluated at radius r and polar angle theta from +z.
std::complex<double> mie_scattered(double kappa, double r, double cos_theta);

/// Radial derivative of the Mie scattered field.
std::complex<double> mie_scattered_dr(double kappa, double r,
                                      double cos_theta);

}  // namespace oracles

#endif  // SCATUQ_TESTS_ORACLES_HPP_
