#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "quadrature.hpp"

namespace scatuq {
namespace geo {

NurbsPatch::NurbsPatch(KnotVector ku, KnotVector kv,
                       std::vector<Vector3d> control,
                       std::vector<double> weights)
    : ku_(std::move(ku)), kv_(std::move(kv)) {
  std::size_t n = static_cast<std::size_t>(num_u()) * num_v();
  require(control.size() == n && weights.size() == n,
          ErrorCode::invalid_argument,
          "NurbsPatch: control net does not match knot vectors");
  net_.resize(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    require(weights[i] > 0.0, ErrorCode::invalid_argument,
            "NurbsPatch: weights must be positive");
    net_[4 * i + 0] = weights[i] * control[i].x();
    net_[4 * i + 1] = weights[i] * control[i].y();
    net_[4 * i + 2] = weights[i] * control[i].z();
    net_[4 * i + 3] = weights[i];
  }
}

Vector3d NurbsPatch::control_point(int i, int j) const {
  std::size_t k = 4 * (static_cast<std::size_t>(j) * num_u() + i);
  double w = net_[k + 3];
  return Vector3d(net_[k], net_[k + 1], net_[k + 2]) / w;
}

double NurbsPatch::weight(int i, int j) const {
  return net_[4 * (static_cast<std::size_t>(j) * num_u() + i) + 3];
}

void NurbsPatch::translate_control_point(int i, int j, const Vector3d& d) {
  std::size_t k = 4 * (static_cast<std::size_t>(j) * num_u() + i);
  double w = net_[k + 3];
  net_[k + 0] += w * d.x();
  net_[k + 1] += w * d.y();
  net_[k + 2] += w * d.z();
}

Vector3d NurbsPatch::eval(double u, double v) const {
  int pu = degree_u(), pv = degree_v();
  int su = ku_.find_span(u), sv = kv_.find_span(v);
  double bu[32], bv[32];
  ku_.basis_funs(su, u, bu);
  kv_.basis_funs(sv, v, bv);
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  for (int j = 0; j <= pv; ++j) {
    int gj = sv - pv + j;
    for (int i = 0; i <= pu; ++i) {
      int gi = su - pu + i;
      const double* h = &net_[4 * (static_cast<std::size_t>(gj) * num_u() + gi)];
      double b = bu[i] * bv[j];
      acc += b * Eigen::Map<const Eigen::Vector4d>(h);
    }
  }
  return acc.head<3>() / acc[3];
}

void NurbsPatch::eval_jet(double u, double v, Vector3d* s, Vector3d* su_out,
                          Vector3d* sv_out) const {
  int pu = degree_u(), pv = degree_v();
  int su = ku_.find_span(u), sv = kv_.find_span(v);
  double bu[32], bv[32], du[32], dv[32];
  ku_.basis_funs_derivs(su, u, bu, du);
  kv_.basis_funs_derivs(sv, v, bv, dv);
  Eigen::Vector4d a = Eigen::Vector4d::Zero(), au = a, av = a;
  for (int j = 0; j <= pv; ++j) {
    int gj = sv - pv + j;
    for (int i = 0; i <= pu; ++i) {
      int gi = su - pu + i;
      Eigen::Map<const Eigen::Vector4d> h(
          &net_[4 * (static_cast<std::size_t>(gj) * num_u() + gi)]);
      a += (bu[i] * bv[j]) * h;
      au += (du[i] * bv[j]) * h;
      av += (bu[i] * dv[j]) * h;
    }
  }
  double w = a[3];
  Vector3d S = a.head<3>() / w;
  if (s) *s = S;
  if (su_out) *su_out = (au.head<3>() - au[3] * S) / w;
  if (sv_out) *sv_out = (av.head<3>() - av[3] * S) / w;
}

SurfaceFrame NurbsPatch::frame(double u, double v) const {
  SurfaceFrame f;
  Vector3d su, sv;
  eval_jet(u, v, &f.point, &su, &sv);
  Vector3d cross = su.cross(sv);
  f.measure = cross.norm();
  require(f.measure > 1e-14, ErrorCode::numerics,
          "degenerate parametrization: vanishing surface measure");
  f.normal = (normal_sign_ / f.measure) * cross;
  return f;
}

NurbsPatch NurbsPatch::refined_dyadic(int times) const {
  NurbsPatch out = *this;
  for (int t = 0; t < times; ++t) {
    for (int dir = 0; dir < 2; ++dir) {
      const KnotVector& kv = dir == 0 ? out.ku_ : out.kv_;
      std::vector<double> mids;
      const auto& knots = kv.knots();
      for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        if (knots[i + 1] > knots[i])
          mids.push_back(0.5 * (knots[i] + knots[i + 1]));
      for (double m : mids)
        splines::insert_knot(dir, m, out.ku_, out.kv_, out.net_, 4);
    }
  }
  return out;
}

NurbsPatch NurbsPatch::elevated(int pu, int pv) const {
  require(pu >= degree_u() && pv >= degree_v(), ErrorCode::invalid_argument,
          "elevated: target degree below current");
  NurbsPatch out = *this;
  while (out.degree_u() < pu)
    splines::elevate_bezier(0, out.ku_, out.kv_, out.net_, 4);
  while (out.degree_v() < pv)
    splines::elevate_bezier(1, out.ku_, out.kv_, out.net_, 4);
  return out;
}

void NurbsPatch::rational_basis(double u, double v, int* first_u, int* first_v,
                                double* values) const {
  int pu = degree_u(), pv = degree_v();
  int su = ku_.find_span(u), sv = kv_.find_span(v);
  double bu[32], bv[32];
  ku_.basis_funs(su, u, bu);
  kv_.basis_funs(sv, v, bv);
  *first_u = su - pu;
  *first_v = sv - pv;
  double wsum = 0.0;
  for (int j = 0; j <= pv; ++j) {
    int gj = sv - pv + j;
    for (int i = 0; i <= pu; ++i) {
      int gi = su - pu + i;
      double w = net_[4 * (static_cast<std::size_t>(gj) * num_u() + gi) + 3];
      double val = bu[i] * bv[j] * w;
      values[j * (pu + 1) + i] = val;
      wsum += val;
    }
  }
  for (int k = 0; k < (pu + 1) * (pv + 1); ++k) values[k] /= wsum;
}

std::uint64_t NurbsPatch::content_hash(std::uint64_t seed) const {
  std::uint64_t h = seed;
  int meta[3] = {degree_u(), degree_v(), normal_sign_};
  h = fnv1a(meta, sizeof(meta), h);
  h = fnv1a(ku_.knots().data(), ku_.knots().size() * sizeof(double), h);
  h = fnv1a(kv_.knots().data(), kv_.knots().size() * sizeof(double), h);
  h = fnv1a(net_.data(), net_.size() * sizeof(double), h);
  return h;
}

namespace {

Eigen::Vector2d edge_param(int edge, double t) {
  switch (edge) {
    case 0: return {t, 0.0};
    case 1: return {1.0, t};
    case 2: return {t, 1.0};
    default: return {0.0, t};
  }
}

// direction of the counterclockwise boundary along the edge's own increasing
// parametrization (normal taken as +cross(S_u, S_v))
int edge_ccw_sign(int edge) { return (edge == 0 || edge == 1) ? 1 : -1; }

std::vector<Vector3d> sample_edge(const NurbsPatch& p, int edge, int n) {
  std::vector<Vector3d> pts(n);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector2d uv = edge_param(edge, static_cast<double>(i) / (n - 1));
    pts[i] = p.eval(uv.x(), uv.y());
  }
  return pts;
}

}  // namespace

MultipatchSurface::MultipatchSurface(std::vector<NurbsPatch> patches)
    : patches_(std::move(patches)) {
  require(!patches_.empty(), ErrorCode::invalid_argument,
          "MultipatchSurface: no patches");
  build_topology();
  orient_outward();
}

MultipatchSurface MultipatchSurface::with_patches(
    std::vector<NurbsPatch> patches) const {
  return MultipatchSurface(std::move(patches));
}

void MultipatchSurface::build_topology() {
  const int kSamples = 33;
  Vector3d lo, hi;
  bounding_box(&lo, &hi);
  double tol = 1e-10 * std::max(1.0, (hi - lo).norm());

  std::vector<std::vector<Vector3d>> edges;
  for (const auto& p : patches_)
    for (int e = 0; e < 4; ++e) edges.push_back(sample_edge(p, e, kSamples));

  auto matches = [&](const std::vector<Vector3d>& a,
                     const std::vector<Vector3d>& b, bool rev) {
    for (int i = 0; i < kSamples; ++i) {
      const Vector3d& q = rev ? b[kSamples - 1 - i] : b[i];
      if ((a[i] - q).norm() > tol) return false;
    }
    return true;
  };

  std::vector<char> collapsed(edges.size(), 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    double ext = 0.0;
    for (const auto& pt : edges[e])
      ext = std::max(ext, (pt - edges[e][0]).norm());
    collapsed[e] = ext < tol;
  }

  glue_.clear();
  std::vector<int> glued(edges.size(), 0);
  for (std::size_t ea = 0; ea < edges.size(); ++ea) {
    if (collapsed[ea]) continue;
    for (std::size_t eb = ea + 1; eb < edges.size(); ++eb) {
      if (collapsed[eb]) continue;
      bool fwd = matches(edges[ea], edges[eb], false);
      bool rev = !fwd && matches(edges[ea], edges[eb], true);
      if (!fwd && !rev) continue;
      require(glued[ea] == 0 && glued[eb] == 0, ErrorCode::invalid_argument,
              "multipatch topology: an edge is glued more than once");
      glued[ea] = glued[eb] = 1;
      glue_.push_back({static_cast<int>(ea) / 4, static_cast<int>(ea) % 4,
                       static_cast<int>(eb) / 4, static_cast<int>(eb) % 4,
                       rev});
    }
  }
}

void MultipatchSurface::orient_outward() {
  int m = num_patches();
  // adjacency with the handedness constraint implied by each glued edge
  std::vector<std::vector<std::pair<int, int>>> adj(m);  // (other, relative h)
  for (const auto& g : glue_) {
    int rel = -edge_ccw_sign(g.edge_a) * edge_ccw_sign(g.edge_b) *
              (g.reversed ? -1 : 1);
    adj[g.patch_a].push_back({g.patch_b, rel});
    adj[g.patch_b].push_back({g.patch_a, rel});
  }
  std::vector<int> h(m, 0);
  for (int root = 0; root < m; ++root) {
    if (h[root] != 0) continue;
    h[root] = 1;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int p = stack.back();
      stack.pop_back();
      for (auto [q, rel] : adj[p]) {
        int want = h[p] * rel;
        if (h[q] == 0) {
          h[q] = want;
          stack.push_back(q);
        } else {
          require(h[q] == want, ErrorCode::invalid_argument,
                  "multipatch topology: inconsistent orientation");
        }
      }
    }
  }
  // fix the global sign with the divergence theorem: positive volume means
  // outward normals for a closed surface
  const auto& gauss = quad::gauss01(6);
  double volume = 0.0;
  for (int p = 0; p < m; ++p) {
    const NurbsPatch& patch = patches_[p];
    const auto& ku = patch.knots_u().knots();
    const auto& kvv = patch.knots_v().knots();
    for (std::size_t i = 0; i + 1 < ku.size(); ++i) {
      if (ku[i + 1] <= ku[i]) continue;
      for (std::size_t j = 0; j + 1 < kvv.size(); ++j) {
        if (kvv[j + 1] <= kvv[j]) continue;
        double du = ku[i + 1] - ku[i], dv = kvv[j + 1] - kvv[j];
        for (std::size_t a = 0; a < gauss.x.size(); ++a) {
          for (std::size_t b = 0; b < gauss.x.size(); ++b) {
            double u = ku[i] + du * gauss.x[a], v = kvv[j] + dv * gauss.x[b];
            Vector3d s, su, sv;
            patch.eval_jet(u, v, &s, &su, &sv);
            volume += h[p] * s.dot(su.cross(sv)) * gauss.w[a] * gauss.w[b] *
                      du * dv / 3.0;
          }
        }
      }
    }
  }
  int global = volume < 0.0 ? -1 : 1;
  for (int p = 0; p < m; ++p) patches_[p].set_normal_sign(global * h[p]);
}

void MultipatchSurface::validate(double tol) const {
  const int kSamples = 33;
  Vector3d lo, hi;
  bounding_box(&lo, &hi);
  double scaled = tol * std::max(1.0, (hi - lo).norm());
  for (const auto& g : glue_) {
    for (int i = 0; i < kSamples; ++i) {
      double t = static_cast<double>(i) / (kSamples - 1);
      Eigen::Vector2d a = edge_param(g.edge_a, t);
      Eigen::Vector2d b = edge_param(g.edge_b, g.reversed ? 1.0 - t : t);
      Vector3d pa = patches_[g.patch_a].eval(a.x(), a.y());
      Vector3d pb = patches_[g.patch_b].eval(b.x(), b.y());
      require((pa - pb).norm() <= scaled, ErrorCode::invalid_argument,
              "multipatch validation: glued edges do not coincide");
    }
  }
  // positive measure on a validation grid per span
  for (const auto& p : patches_) {
    const auto& ku = p.knots_u().knots();
    const auto& kv = p.knots_v().knots();
    for (std::size_t i = 0; i + 1 < ku.size(); ++i) {
      if (ku[i + 1] <= ku[i]) continue;
      for (std::size_t j = 0; j + 1 < kv.size(); ++j) {
        if (kv[j + 1] <= kv[j]) continue;
        for (int a = 0; a < 5; ++a) {
          for (int b = 0; b < 5; ++b) {
            double u = ku[i] + (ku[i + 1] - ku[i]) * (a + 0.5) / 5.0;
            double v = kv[j] + (kv[j + 1] - kv[j]) * (b + 0.5) / 5.0;
            p.frame(u, v);  // throws on degenerate measure
          }
        }
      }
    }
  }
}

void MultipatchSurface::bounding_box(Vector3d* lo, Vector3d* hi) const {
  *lo = Vector3d::Constant(std::numeric_limits<double>::infinity());
  *hi = -*lo;
  for (const auto& p : patches_) {
    for (int j = 0; j < p.num_v(); ++j) {
      for (int i = 0; i < p.num_u(); ++i) {
        Vector3d c = p.control_point(i, j);
        *lo = lo->cwiseMin(c);
        *hi = hi->cwiseMax(c);
      }
    }
  }
}

double MultipatchSurface::area(int quad_order) const {
  const auto& gauss = quad::gauss01(quad_order);
  double total = 0.0;
  for (const auto& p : patches_) {
    const auto& ku = p.knots_u().knots();
    const auto& kv = p.knots_v().knots();
    for (std::size_t i = 0; i + 1 < ku.size(); ++i) {
      if (ku[i + 1] <= ku[i]) continue;
      for (std::size_t j = 0; j + 1 < kv.size(); ++j) {
        if (kv[j + 1] <= kv[j]) continue;
        double du = ku[i + 1] - ku[i], dv = kv[j + 1] - kv[j];
        for (std::size_t a = 0; a < gauss.x.size(); ++a)
          for (std::size_t b = 0; b < gauss.x.size(); ++b)
            total += p.frame(ku[i] + du * gauss.x[a], kv[j] + dv * gauss.x[b])
                         .measure *
                     gauss.w[a] * gauss.w[b] * du * dv;
      }
    }
  }
  return total;
}

std::uint64_t MultipatchSurface::content_hash() const {
  std::uint64_t h = fnv1a("multipatch", 10);
  for (const auto& p : patches_) h = p.content_hash(h);
  return h;
}

MultipatchSurface make_cube() {
  return make_cuboid_shell(Vector3d(0, 0, 0), Vector3d(1, 1, 1));
}

MultipatchSurface make_cuboid_shell(const Vector3d& lo, const Vector3d& hi) {
  require((hi - lo).minCoeff() > 0.0, ErrorCode::invalid_argument,
          "cuboid_shell: hi must exceed lo componentwise");
  // unit-cube faces with outward cross(S_u, S_v)
  const Vector3d corners[6][4] = {
      {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {0, 1, 1}},  // x=0: (0, v, u)
      {{1, 0, 0}, {1, 1, 0}, {1, 0, 1}, {1, 1, 1}},  // x=1: (1, u, v)
      {{0, 0, 0}, {1, 0, 0}, {0, 0, 1}, {1, 0, 1}},  // y=0: (u, 0, v)
      {{0, 1, 0}, {0, 1, 1}, {1, 1, 0}, {1, 1, 1}},  // y=1: (v, 1, u)
      {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}},  // z=0: (v, u, 0)
      {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}},  // z=1: (u, v, 1)
  };
  KnotVector kv = KnotVector::open_uniform(1, 1);
  std::vector<NurbsPatch> patches;
  for (int f = 0; f < 6; ++f) {
    std::vector<Vector3d> cps;
    for (int k = 0; k < 4; ++k)  // order c00, c10, c01, c11
      cps.push_back(lo + (hi - lo).cwiseProduct(corners[f][k]));
    patches.emplace_back(kv, kv, cps, std::vector<double>(4, 1.0));
  }
  return MultipatchSurface(std::move(patches));
}

namespace {

using Grid = std::vector<std::vector<double>>;  // [i][j] Bernstein coefficients

Grid tensor_multiply(const Grid& a, const Grid& b) {
  auto binom = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  int pa1 = static_cast<int>(a.size()) - 1;
  int pa2 = static_cast<int>(a[0].size()) - 1;
  int pb1 = static_cast<int>(b.size()) - 1;
  int pb2 = static_cast<int>(b[0].size()) - 1;
  Grid c(pa1 + pb1 + 1, std::vector<double>(pa2 + pb2 + 1, 0.0));
  for (int i = 0; i <= pa1; ++i)
    for (int j = 0; j <= pa2; ++j)
      for (int k = 0; k <= pb1; ++k)
        for (int l = 0; l <= pb2; ++l)
          c[i + k][j + l] += binom(pa1, i) * binom(pb1, k) /
                             binom(pa1 + pb1, i + k) * binom(pa2, j) *
                             binom(pb2, l) / binom(pa2 + pb2, j + l) *
                             a[i][j] * b[k][l];
  return c;
}

}  // namespace

MultipatchSurface make_sphere() {
  // Each cube face maps exactly onto the unit sphere through a Householder
  // reflection of the face axis e about a biquadratic direction field d:
  //   S = (2 d (d.e) - e (d.d)) / (d.d),   |S| = 1 for any d != 0.
  // The direction field restricted to an edge is e*delta + g, where g/delta is
  // the canonical rational-quadratic great-circle arc between the corners, so
  // adjacent faces share their boundary curves exactly.
  struct Face {
    Vector3d e, a, b;
  };
  const Face faces[6] = {
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},  {{-1, 0, 0}, {0, 0, 1}, {0, 1, 0}},
      {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}},  {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},
      {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}},  {{0, 0, -1}, {0, 1, 0}, {1, 0, 0}},
  };
  const double w1 = std::sqrt(2.0 / 3.0);  // arc weight, cos(theta/2)
  auto arc_mid = [](const Vector3d& a, const Vector3d& b) {
    return Vector3d((a + b) / (1.0 + a.dot(b)));
  };
  std::vector<NurbsPatch> patches;
  for (const Face& f : faces) {
    const double s = 1.0 / std::sqrt(3.0);
    Vector3d A00 = s * (f.e - f.a - f.b), A10 = s * (f.e + f.a - f.b);
    Vector3d A01 = s * (f.e - f.a + f.b), A11 = s * (f.e + f.a + f.b);
    Vector3d D[3][3];
    D[0][0] = f.e + A00;
    D[2][0] = f.e + A10;
    D[0][2] = f.e + A01;
    D[2][2] = f.e + A11;
    D[1][0] = w1 * (f.e + arc_mid(A00, A10));
    D[1][2] = w1 * (f.e + arc_mid(A01, A11));
    D[0][1] = w1 * (f.e + arc_mid(A00, A01));
    D[2][1] = w1 * (f.e + arc_mid(A10, A11));
    D[1][1] = w1 * w1 * (f.e + arc_mid(A00, A11));

    Grid comp[3], de(3, std::vector<double>(3));
    for (int c = 0; c < 3; ++c) comp[c] = Grid(3, std::vector<double>(3));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int c = 0; c < 3; ++c) comp[c][i][j] = D[i][j][c];
        de[i][j] = D[i][j].dot(f.e);
      }
    }
    Grid dd(5, std::vector<double>(5, 0.0));
    for (int c = 0; c < 3; ++c) {
      Grid sq = tensor_multiply(comp[c], comp[c]);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) dd[i][j] += sq[i][j];
    }
    Grid num[3];
    for (int c = 0; c < 3; ++c) {
      num[c] = tensor_multiply(comp[c], de);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
          num[c][i][j] = 2.0 * num[c][i][j] - f.e[c] * dd[i][j];
    }
    std::vector<Vector3d> cps;
    std::vector<double> weights;
    for (int j = 0; j < 5; ++j) {
      for (int i = 0; i < 5; ++i) {
        double w = dd[i][j];
        require(w > 0.0, ErrorCode::numerics, "sphere: nonpositive weight");
        weights.push_back(w);
        cps.emplace_back(num[0][i][j] / w, num[1][i][j] / w, num[2][i][j] / w);
      }
    }
    KnotVector k4 = KnotVector::open_uniform(4, 1);
    patches.emplace_back(k4, k4, std::move(cps), std::move(weights));
  }
  return MultipatchSurface(std::move(patches));
}

MultipatchSurface builtin_geometry(const std::string& name) {
  if (name == "cube") return make_cube();
  if (name == "sphere") return make_sphere();
  if (name == "cuboid_shell")
    return make_cuboid_shell(Vector3d(-1.5, -0.5, -0.5),
                             Vector3d(3.5, 2.5, 1.5));
  fail(ErrorCode::invalid_argument, "unknown builtin geometry: " + name);
}

ElementMesh ElementMesh::build(const MultipatchSurface& s, int level) {
  require(level >= 0, ErrorCode::invalid_argument, "ElementMesh: level < 0");
  ElementMesh mesh;
  mesh.level = level;
  mesh.surface = &s;
  int n = 1 << level;
  for (int p = 0; p < s.num_patches(); ++p) {
    const NurbsPatch& patch = s.patch(p);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        Element e;
        e.patch = p;
        e.u0 = static_cast<double>(i) / n;
        e.u1 = static_cast<double>(i + 1) / n;
        e.v0 = static_cast<double>(j) / n;
        e.v1 = static_cast<double>(j + 1) / n;
        e.corner[0] = patch.eval(e.u0, e.v0);
        e.corner[1] = patch.eval(e.u1, e.v0);
        e.corner[2] = patch.eval(e.u1, e.v1);
        e.corner[3] = patch.eval(e.u0, e.v1);
        e.center = patch.eval(0.5 * (e.u0 + e.u1), 0.5 * (e.v0 + e.v1));
        e.diam = 0.0;
        for (int a = 0; a < 4; ++a)
          for (int b = a + 1; b < 4; ++b)
            e.diam = std::max(e.diam, (e.corner[a] - e.corner[b]).norm());
        mesh.h = std::max(mesh.h, e.diam);
        mesh.elements.push_back(e);
      }
    }
  }
  return mesh;
}

MultipatchSurface read_multipatch(std::istream& in) {
  std::string tok;
  int m = 0, p1 = 0, p2 = 0;
  in >> tok;
  require(tok == "patches", ErrorCode::io, "multipatch: expected 'patches'");
  in >> m >> tok >> p1 >> p2;
  require(tok == "degree" && m > 0 && p1 >= 0 && p2 >= 0, ErrorCode::io,
          "multipatch: malformed header");
  std::vector<NurbsPatch> patches;
  for (int p = 0; p < m; ++p) {
    auto read_knots = [&](int degree) {
      int count = 0;
      in >> count;
      require(in.good() && count > 0, ErrorCode::io,
              "multipatch: bad knot count");
      std::vector<double> k(count);
      for (double& x : k) in >> x;
      return KnotVector(degree, std::move(k));
    };
    KnotVector ku = read_knots(p1);
    KnotVector kv = read_knots(p2);
    int n = ku.num_basis() * kv.num_basis();
    std::vector<Vector3d> cps(n);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
      in >> cps[i].x() >> cps[i].y() >> cps[i].z() >> w[i];
    }
    require(in.good() || in.eof(), ErrorCode::io,
            "multipatch: truncated control net");
    patches.emplace_back(std::move(ku), std::move(kv), std::move(cps),
                         std::move(w));
  }
  return MultipatchSurface(std::move(patches));
}

MultipatchSurface load_multipatch(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open " + path);
  return read_multipatch(in);
}

void write_multipatch(const MultipatchSurface& s, std::ostream& out) {
  out.precision(17);
  out << "patches " << s.num_patches() << " degree "
      << s.patch(0).degree_u() << " " << s.patch(0).degree_v() << "\n";
  for (int p = 0; p < s.num_patches(); ++p) {
    const NurbsPatch& patch = s.patch(p);
    for (const KnotVector* kv : {&patch.knots_u(), &patch.knots_v()}) {
      out << kv->knots().size();
      for (double x : kv->knots()) out << " " << x;
      out << "\n";
    }
    for (int j = 0; j < patch.num_v(); ++j) {
      for (int i = 0; i < patch.num_u(); ++i) {
        Vector3d c = patch.control_point(i, j);
        out << c.x() << " " << c.y() << " " << c.z() << " " << patch.weight(i, j)
            << "\n";
      }
    }
  }
}

void save_multipatch(const MultipatchSurface& s, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open " + path);
  write_multipatch(s, out);
}

void export_vtk(const MultipatchSurface& s, int level, int samples_per_element,
                const std::string& path,
                const std::vector<std::pair<std::string, std::function<double(
                    const SurfaceFrame&)>>>& fields) {
  ElementMesh mesh = ElementMesh::build(s, level);
  int k = std::max(1, samples_per_element);
  std::vector<Vector3d> points;
  std::vector<std::array<int, 4>> quads;
  std::vector<std::vector<double>> data(fields.size());
  for (const auto& e : mesh.elements) {
    int base = static_cast<int>(points.size());
    for (int j = 0; j <= k; ++j) {
      for (int i = 0; i <= k; ++i) {
        double u = e.u0 + (e.u1 - e.u0) * i / k;
        double v = e.v0 + (e.v1 - e.v0) * j / k;
        SurfaceFrame f = s.patch(e.patch).frame(u, v);
        points.push_back(f.point);
        for (std::size_t q = 0; q < fields.size(); ++q)
          data[q].push_back(fields[q].second(f));
      }
    }
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < k; ++i)
        quads.push_back({base + j * (k + 1) + i, base + j * (k + 1) + i + 1,
                         base + (j + 1) * (k + 1) + i + 1,
                         base + (j + 1) * (k + 1) + i});
  }
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open " + path);
  out.precision(12);
  out << "# vtk DataFile Version 3.0\nscatuq surface\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << points.size() << " double\n";
  for (const auto& p : points)
    out << p.x() << " " << p.y() << " " << p.z() << "\n";
  out << "POLYGONS " << quads.size() << " " << 5 * quads.size() << "\n";
  for (const auto& q : quads)
    out << "4 " << q[0] << " " << q[1] << " " << q[2] << " " << q[3] << "\n";
  if (!fields.empty()) {
    out << "POINT_DATA " << points.size() << "\n";
    for (std::size_t q = 0; q < fields.size(); ++q) {
      out << "SCALARS " << fields[q].first << " double 1\nLOOKUP_TABLE default\n";
      for (double v : data[q]) out << v << "\n";
    }
  }
}

}  // namespace geo
}  // namespace scatuq
