#ifndef SCATUQ_SPLINES_HPP_
#define SCATUQ_SPLINES_HPP_

#include <vector>

#include "common.hpp"

namespace scatuq {
namespace splines {

/// p-open knot vector on [0,1] with locally quasi-uniform interior spans.
/// Knots are ascending, the first and last p+1 entries are clamped to 0 and 1,
/// and num_basis() > degree. Evaluation at x == 1 uses the right-closed
/// convention so that partition of unity holds on the closed interval.
class KnotVector {
 public:
  KnotVector() = default;
  KnotVector(int degree, std::vector<double> knots);

  /// Uniformly spaced open knot vector with `segments` nonempty spans.
  static KnotVector open_uniform(int degree, int segments);

  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }
  int num_basis() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  int num_spans() const;
  /// Quasi-uniformity constant theta >= 1 over nonempty interior spans.
  double theta() const { return theta_; }

  /// Index i with knots[i] <= x < knots[i+1]; the last nonempty span at x == 1.
  int find_span(double x) const;

  /// The degree+1 basis values that are nonzero on the given span.
  void basis_funs(int span, double x, double* out) const;
  /// Values and first derivatives of the nonzero basis functions.
  void basis_funs_derivs(int span, double x, double* val, double* der) const;

  /// Dyadic refinement: one knot inserted at the midpoint of every span.
  KnotVector refined_dyadic() const;

  bool operator==(const KnotVector& o) const {
    return degree_ == o.degree_ && knots_ == o.knots_;
  }

 private:
  int degree_ = 0;
  std::vector<double> knots_;
  double theta_ = 1.0;
};

/// Single basis function b_j^p(x), span-based evaluation.
double eval_bspline(const KnotVector& kv, int j, double x);

/// Boehm knot insertion for a single knot into one parametric direction of a
/// tensor-product net. The net has n1 x n2 entries of `stride` doubles each,
/// stored with index (i1 + n1 * i2) * stride. Direction 0 inserts into kv_u
/// (acting along i1), direction 1 into kv_v.
void insert_knot(int direction, double t, KnotVector& kv_u, KnotVector& kv_v,
                 std::vector<double>& net, int stride);

/// One-step Bezier degree elevation along a direction. The knot vector must
/// have no interior knots.
void elevate_bezier(int direction, KnotVector& kv_u, KnotVector& kv_v,
                    std::vector<double>& net, int stride);

/// Coefficients of the product of two polynomials given in Bernstein form.
std::vector<double> bernstein_multiply(const std::vector<double>& a,
                                       const std::vector<double>& b);

}  // namespace splines
}  // namespace scatuq

#endif  // SCATUQ_SPLINES_HPP_
