#include "splines.hpp"

#include <algorithm>
#include <cmath>

namespace scatuq {
namespace splines {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
  require(degree_ >= 0, ErrorCode::invalid_argument, "knot vector: degree < 0");
  int m = static_cast<int>(knots_.size());
  require(m >= 2 * (degree_ + 1), ErrorCode::invalid_argument,
          "knot vector: too few knots");
  require(num_basis() > degree_, ErrorCode::invalid_argument,
          "knot vector: requires k > p");
  for (int i = 0; i + 1 < m; ++i)
    require(knots_[i] <= knots_[i + 1], ErrorCode::invalid_argument,
            "knot vector: not ascending");
  for (int i = 0; i <= degree_; ++i) {
    require(knots_[i] == 0.0, ErrorCode::invalid_argument,
            "knot vector: first p+1 knots must be 0");
    require(knots_[m - 1 - i] == 1.0, ErrorCode::invalid_argument,
            "knot vector: last p+1 knots must be 1");
  }
  // quasi-uniformity over consecutive nonzero interior steps
  theta_ = 1.0;
  double prev = -1.0;
  for (int j = degree_; j + 1 < m - degree_; ++j) {
    double h = knots_[j + 1] - knots_[j];
    if (h <= 0.0) continue;
    if (prev > 0.0) theta_ = std::max({theta_, h / prev, prev / h});
    prev = h;
  }
}

KnotVector KnotVector::open_uniform(int degree, int segments) {
  require(segments >= 1, ErrorCode::invalid_argument,
          "open_uniform: segments < 1");
  std::vector<double> k;
  k.reserve(2 * (degree + 1) + segments - 1);
  for (int i = 0; i <= degree; ++i) k.push_back(0.0);
  for (int i = 1; i < segments; ++i)
    k.push_back(static_cast<double>(i) / segments);
  for (int i = 0; i <= degree; ++i) k.push_back(1.0);
  return KnotVector(degree, std::move(k));
}

int KnotVector::num_spans() const {
  int c = 0;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
    if (knots_[i + 1] > knots_[i]) ++c;
  return c;
}

int KnotVector::find_span(double x) const {
  int n = num_basis();
  require(x >= 0.0 && x <= 1.0, ErrorCode::invalid_argument,
          "find_span: x outside [0,1]");
  if (x >= knots_[n]) return n - 1;  // right-closed at 1
  int lo = degree_, hi = n;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    (x < knots_[mid] ? hi : lo) = mid;
  }
  return lo;
}

void KnotVector::basis_funs(int span, double x, double* out) const {
  int p = degree_;
  out[0] = 1.0;
  std::vector<double> left(p + 1), right(p + 1);
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots_[span + 1 - j];
    right[j] = knots_[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double tmp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    out[j] = saved;
  }
}

void KnotVector::basis_funs_derivs(int span, double x, double* val,
                                   double* der) const {
  int p = degree_;
  if (p == 0) {
    val[0] = 1.0;
    der[0] = 0.0;
    return;
  }
  // degree p values via basis_funs, derivatives from degree p-1 values
  basis_funs(span, x, val);
  std::vector<double> lower(p, 0.0);
  {
    // nonzero degree-(p-1) functions on this span: indices span-p+1..span
    lower[0] = 1.0;
    std::vector<double> left(p), right(p);
    for (int j = 1; j <= p - 1; ++j) {
      left[j] = x - knots_[span + 1 - j];
      right[j] = knots_[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        double tmp = lower[r] / (right[r + 1] + left[j - r]);
        lower[r] = saved + right[r + 1] * tmp;
        saved = left[j - r] * tmp;
      }
      lower[j] = saved;
    }
  }
  for (int r = 0; r <= p; ++r) {
    int i = span - p + r;  // global index of this basis function
    double a = 0.0, b = 0.0;
    if (r > 0) {
      double denom = knots_[i + p] - knots_[i];
      if (denom > 0.0) a = p * lower[r - 1] / denom;
    }
    if (r < p) {
      double denom = knots_[i + p + 1] - knots_[i + 1];
      if (denom > 0.0) b = p * lower[r] / denom;
    }
    der[r] = a - b;
  }
}

KnotVector KnotVector::refined_dyadic() const {
  std::vector<double> out;
  out.reserve(knots_.size() + num_spans());
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    out.push_back(knots_[i]);
    if (knots_[i + 1] > knots_[i])
      out.push_back(0.5 * (knots_[i] + knots_[i + 1]));
  }
  out.push_back(knots_.back());
  return KnotVector(degree_, std::move(out));
}

double eval_bspline(const KnotVector& kv, int j, double x) {
  require(j >= 0 && j < kv.num_basis(), ErrorCode::invalid_argument,
          "eval_bspline: index out of range");
  require(x >= 0.0 && x <= 1.0, ErrorCode::invalid_argument,
          "eval_bspline: x outside [0,1]");
  int p = kv.degree();
  int span = kv.find_span(x);
  if (j < span - p || j > span) return 0.0;
  std::vector<double> vals(p + 1);
  kv.basis_funs(span, x, vals.data());
  return vals[j - (span - p)];
}

void insert_knot(int direction, double t, KnotVector& kv_u, KnotVector& kv_v,
                 std::vector<double>& net, int stride) {
  KnotVector& kv = direction == 0 ? kv_u : kv_v;
  int p = kv.degree();
  const std::vector<double>& U = kv.knots();
  int span = kv.find_span(t);
  int n1 = kv_u.num_basis(), n2 = kv_v.num_basis();
  int na = direction == 0 ? n1 : n2;  // size along insertion direction
  int nb = direction == 0 ? n2 : n1;
  std::vector<double> out(static_cast<std::size_t>(na + 1) * nb * stride);
  auto src = [&](int a, int b) -> const double* {
    int i1 = direction == 0 ? a : b;
    int i2 = direction == 0 ? b : a;
    return &net[(static_cast<std::size_t>(i2) * n1 + i1) * stride];
  };
  auto dst = [&](int a, int b) -> double* {
    int m1 = direction == 0 ? na + 1 : nb;
    int i1 = direction == 0 ? a : b;
    int i2 = direction == 0 ? b : a;
    return &out[(static_cast<std::size_t>(i2) * m1 + i1) * stride];
  };
  for (int b = 0; b < nb; ++b) {
    for (int a = 0; a <= na; ++a) {
      double* d = dst(a, b);
      if (a <= span - p) {
        std::copy(src(a, b), src(a, b) + stride, d);
      } else if (a > span) {
        std::copy(src(a - 1, b), src(a - 1, b) + stride, d);
      } else {
        double alpha = (t - U[a]) / (U[a + p] - U[a]);
        const double* q0 = src(a - 1, b);
        const double* q1 = src(a, b);
        for (int s = 0; s < stride; ++s)
          d[s] = alpha * q1[s] + (1.0 - alpha) * q0[s];
      }
    }
  }
  std::vector<double> knots = U;
  knots.insert(knots.begin() + span + 1, t);
  kv = KnotVector(p, std::move(knots));
  net = std::move(out);
}

void elevate_bezier(int direction, KnotVector& kv_u, KnotVector& kv_v,
                    std::vector<double>& net, int stride) {
  KnotVector& kv = direction == 0 ? kv_u : kv_v;
  int p = kv.degree();
  require(kv.num_spans() == 1, ErrorCode::unsupported,
          "elevate_bezier: interior knots present");
  int n1 = kv_u.num_basis(), n2 = kv_v.num_basis();
  int na = direction == 0 ? n1 : n2;
  int nb = direction == 0 ? n2 : n1;
  require(na == p + 1, ErrorCode::invalid_argument, "elevate_bezier: not Bezier");
  std::vector<double> out(static_cast<std::size_t>(na + 1) * nb * stride, 0.0);
  auto src = [&](int a, int b) -> const double* {
    int i1 = direction == 0 ? a : b;
    int i2 = direction == 0 ? b : a;
    return &net[(static_cast<std::size_t>(i2) * n1 + i1) * stride];
  };
  auto dst = [&](int a, int b) -> double* {
    int m1 = direction == 0 ? na + 1 : nb;
    int i1 = direction == 0 ? a : b;
    int i2 = direction == 0 ? b : a;
    return &out[(static_cast<std::size_t>(i2) * m1 + i1) * stride];
  };
  for (int b = 0; b < nb; ++b) {
    for (int a = 0; a <= p + 1; ++a) {
      double* d = dst(a, b);
      double alpha = static_cast<double>(a) / (p + 1);
      if (a > 0) {
        const double* q = src(a - 1, b);
        for (int s = 0; s < stride; ++s) d[s] += alpha * q[s];
      }
      if (a <= p) {
        const double* q = src(a, b);
        for (int s = 0; s < stride; ++s) d[s] += (1.0 - alpha) * q[s];
      }
    }
  }
  std::vector<double> knots(2 * (p + 2), 0.0);
  for (std::size_t i = knots.size() / 2; i < knots.size(); ++i) knots[i] = 1.0;
  kv = KnotVector(p + 1, std::move(knots));
  net = std::move(out);
}

std::vector<double> bernstein_multiply(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  auto binom = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  int pa = static_cast<int>(a.size()) - 1, pb = static_cast<int>(b.size()) - 1;
  int pc = pa + pb;
  std::vector<double> c(pc + 1, 0.0);
  for (int i = 0; i <= pa; ++i)
    for (int j = 0; j <= pb; ++j)
      c[i + j] += binom(pa, i) * binom(pb, j) / binom(pc, i + j) * a[i] * b[j];
  return c;
}

}  // namespace splines
}  // namespace scatuq
