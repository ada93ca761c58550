#include "bem.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "quadrature.hpp"

namespace scatuq {
namespace bem {

Complex helmholtz_kernel(double kappa, const Vector3d& x, const Vector3d& z) {
  double r = (x - z).norm();
  require(r >= 1e-14, ErrorCode::numerics, "helmholtz_kernel: singular point");
  return std::exp(Complex(0.0, kappa * r)) / (4.0 * kPi * r);
}

Complex dlp_kernel(double kappa, const Vector3d& x, const Vector3d& z,
                   const Vector3d& n_z) {
  Vector3d diff = z - x;
  double r = diff.norm();
  require(r >= 1e-14, ErrorCode::numerics, "dlp_kernel: singular point");
  Complex factor = std::exp(Complex(0.0, kappa * r)) *
                   (Complex(0.0, kappa * r) - 1.0) / (4.0 * kPi * r * r * r);
  return factor * diff.dot(n_z);
}

std::pair<Complex, Complex> incident_trace(const WaveContext& ctx,
                                           const Vector3d& x,
                                           const Vector3d& n) {
  Complex u = std::exp(Complex(0.0, ctx.kappa * ctx.direction.dot(x)));
  Complex dn = Complex(0.0, ctx.kappa * ctx.direction.dot(n)) * u;
  return {u, dn};
}

namespace {

// ---------------------------------------------------------------------------
// regularized quadrature tables on the 4-cube, parameter-domain only
// ---------------------------------------------------------------------------

struct QuadPoint4 {
  double x1, x2, y1, y2, w;
};

using Table = std::vector<QuadPoint4>;

// coincident elements: relative coordinates z = y - x with Duffy splitting of
// the z-square around the origin; 8 smooth pieces
Table make_coincident_table(int q) {
  const auto& g = quad::gauss01(q);
  Table table;
  table.reserve(8ull * q * q * q * q);
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      for (int variant = 0; variant < 2; ++variant) {
        for (int it = 0; it < q; ++it) {
          for (int iv = 0; iv < q; ++iv) {
            double t = g.x[it], vv = g.x[iv];
            double a = variant == 0 ? t : t * vv;
            double b = variant == 0 ? t * vv : t;
            double base = g.w[it] * g.w[iv] * t * (1.0 - a) * (1.0 - b);
            for (int i1 = 0; i1 < q; ++i1) {
              for (int i2 = 0; i2 < q; ++i2) {
                QuadPoint4 p;
                p.x1 = (s1 < 0 ? a : 0.0) + (1.0 - a) * g.x[i1];
                p.x2 = (s2 < 0 ? b : 0.0) + (1.0 - b) * g.x[i2];
                p.y1 = p.x1 + s1 * a;
                p.y2 = p.x2 + s2 * b;
                p.w = base * g.w[i1] * g.w[i2];
                table.push_back(p);
              }
            }
          }
        }
      }
    }
  }
  return table;
}

// edge-adjacent elements, both mapped so the shared edge is {x2 = 0} = {y2 = 0}
// with aligned direction; relative coordinate u = y1 - x1; 6 smooth pieces by
// the largest of |u|, x2, y2 and the sign of u
Table make_edge_table(int q) {
  const auto& g = quad::gauss01(q);
  Table table;
  table.reserve(6ull * q * q * q * q);
  auto emit = [&](double u, double x2, double y2, double jac, double gw) {
    for (int ix = 0; ix < q; ++ix) {
      QuadPoint4 p;
      double len = 1.0 - std::abs(u);
      p.x1 = std::max(0.0, -u) + len * g.x[ix];
      p.x2 = x2;
      p.y1 = p.x1 + u;
      p.y2 = y2;
      p.w = jac * len * gw * g.w[ix];
      table.push_back(p);
    }
  };
  for (int it = 0; it < q; ++it) {
    for (int ib = 0; ib < q; ++ib) {
      for (int ic = 0; ic < q; ++ic) {
        double t = g.x[it], b = g.x[ib], c = g.x[ic];
        double gw = g.w[it] * g.w[ib] * g.w[ic];
        double jac = t * t;
        emit(t, t * b, t * c, jac, gw);    // u largest, u > 0
        emit(-t, t * b, t * c, jac, gw);   // u largest, u < 0
        emit(t * b, t, t * c, jac, gw);    // x2 largest, u > 0
        emit(-t * b, t, t * c, jac, gw);   // x2 largest, u < 0
        emit(t * b, t * c, t, jac, gw);    // y2 largest, u > 0
        emit(-t * b, t * c, t, jac, gw);   // y2 largest, u < 0
      }
    }
  }
  return table;
}

// vertex-adjacent elements, shared corner at the origin of both; 4 pieces by
// the largest coordinate
Table make_vertex_table(int q) {
  const auto& g = quad::gauss01(q);
  Table table;
  table.reserve(4ull * q * q * q * q);
  for (int it = 0; it < q; ++it) {
    for (int ia = 0; ia < q; ++ia) {
      for (int ib = 0; ib < q; ++ib) {
        for (int ic = 0; ic < q; ++ic) {
          double t = g.x[it], a = g.x[ia], b = g.x[ib], c = g.x[ic];
          double w = g.w[it] * g.w[ia] * g.w[ib] * g.w[ic] * t * t * t;
          table.push_back({t, t * a, t * b, t * c, w});
          table.push_back({t * a, t, t * b, t * c, w});
          table.push_back({t * a, t * b, t, t * c, w});
          table.push_back({t * a, t * b, t * c, t, w});
        }
      }
    }
  }
  return table;
}

Table make_far_table(int q) {
  const auto& g = quad::gauss01(q);
  Table table;
  table.reserve(static_cast<std::size_t>(q) * q * q * q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (int c = 0; c < q; ++c)
        for (int d = 0; d < q; ++d)
          table.push_back({g.x[a], g.x[b], g.x[c], g.x[d],
                           g.w[a] * g.w[b] * g.w[c] * g.w[d]});
  return table;
}

enum TableKind { kCoincident = 0, kEdge = 1, kVertex = 2, kFar = 3 };

const Table& cached_table(TableKind kind, int q) {
  static std::map<std::pair<int, int>, Table> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto key = std::make_pair(static_cast<int>(kind), q);
  auto it = cache.find(key);
  if (it == cache.end()) {
    Table t;
    switch (kind) {
      case kCoincident: t = make_coincident_table(q); break;
      case kEdge: t = make_edge_table(q); break;
      case kVertex: t = make_vertex_table(q); break;
      case kFar: t = make_far_table(q); break;
    }
    it = cache.emplace(key, std::move(t)).first;
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// square symmetries: index s in 0..7, (s & 4) swaps, then s & 3 rotations of
// (x, y) -> (1 - y, x)
// ---------------------------------------------------------------------------

inline void apply_sym(int s, double& x, double& y) {
  if (s & 4) std::swap(x, y);
  int rot = s & 3;
  for (int r = 0; r < rot; ++r) {
    double nx = 1.0 - y;
    y = x;
    x = nx;
  }
}

// corner ids 0:(0,0) 1:(1,0) 2:(1,1) 3:(0,1)
struct SymTables {
  int corner_image[8][4];
  int directed_edge[4][4];  // [c0][c1] -> sym mapping (0,0)->c0, (1,0)->c1
  SymTables() {
    const double cx[4] = {0, 1, 1, 0};
    const double cy[4] = {0, 0, 1, 1};
    for (int s = 0; s < 8; ++s) {
      for (int c = 0; c < 4; ++c) {
        double x = cx[c], y = cy[c];
        apply_sym(s, x, y);
        for (int d = 0; d < 4; ++d)
          if (std::abs(x - cx[d]) + std::abs(y - cy[d]) < 0.5)
            corner_image[s][c] = d;
      }
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) directed_edge[a][b] = -1;
    for (int s = 0; s < 8; ++s)
      directed_edge[corner_image[s][0]][corner_image[s][1]] = s;
  }
};

const SymTables& sym_tables() {
  static SymTables tables;
  return tables;
}

// ---------------------------------------------------------------------------
// element data and pair classification
// ---------------------------------------------------------------------------

struct ElementData {
  int patch;
  double u0, du, v0, dv;
  Vector3d center;
  double diam;
  std::array<int, 4> corner_node;
  std::vector<int> dofs;  // global dof ids, row-major local block
  int first_u, first_v;
};

struct AssemblyPlan {
  std::vector<ElementData> elements;
  double h;
};

AssemblyPlan build_plan(const geo::MultipatchSurface& surface,
                        const geo::SplineSpace& space) {
  geo::ElementMesh mesh = geo::ElementMesh::build(surface, space.level());
  AssemblyPlan plan;
  plan.h = mesh.h;
  int pu = space.degree_u(), pv = space.degree_v();
  // cluster corners into nodes
  std::vector<Vector3d> corners;
  for (const auto& e : mesh.elements)
    for (int c = 0; c < 4; ++c) corners.push_back(e.corner[c]);
  double tol = 1e-6 * std::max(mesh.h, 1e-12);
  std::vector<int> node(corners.size());
  std::vector<Vector3d> reps;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    int found = -1;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if ((corners[i] - reps[r]).norm() < tol) {
        found = static_cast<int>(r);
        break;
      }
    }
    if (found < 0) {
      reps.push_back(corners[i]);
      found = static_cast<int>(reps.size()) - 1;
    }
    node[i] = found;
  }
  for (std::size_t ei = 0; ei < mesh.elements.size(); ++ei) {
    const auto& me = mesh.elements[ei];
    ElementData e;
    e.patch = me.patch;
    e.u0 = me.u0;
    e.du = me.u1 - me.u0;
    e.v0 = me.v0;
    e.dv = me.v1 - me.v0;
    e.center = me.center;
    e.diam = me.diam;
    for (int c = 0; c < 4; ++c) e.corner_node[c] = node[4 * ei + c];
    // local dof block from the basis at the element midpoint
    double mid_u = me.u0 + 0.5 * e.du, mid_v = me.v0 + 0.5 * e.dv;
    double scratch[1024];
    space.basis(e.patch, mid_u, mid_v, &e.first_u, &e.first_v, scratch);
    for (int j = 0; j <= pv; ++j)
      for (int i = 0; i <= pu; ++i)
        e.dofs.push_back(
            space.global_index(e.patch, e.first_u + i, e.first_v + j));
    plan.elements.push_back(std::move(e));
  }
  return plan;
}

struct PairClass {
  TableKind kind;
  int sym_a = 0, sym_b = 0;
  int far_order = 0;
};

PairClass classify(const ElementData& a, const ElementData& b, int base_order,
                   int max_order, double mesh_h) {
  PairClass pc;
  if (&a == &b) {
    pc.kind = kCoincident;
    return pc;
  }
  // shared corner nodes
  std::vector<std::pair<int, int>> shared;  // (corner idx in a, in b)
  for (int ca = 0; ca < 4; ++ca)
    for (int cb = 0; cb < 4; ++cb)
      if (a.corner_node[ca] == b.corner_node[cb]) shared.push_back({ca, cb});
  require(shared.size() <= 2, ErrorCode::unsupported,
          "assembly: unsupported element adjacency (shared corners > 2)");
  const SymTables& st = sym_tables();
  if (shared.size() == 2) {
    int a1 = shared[0].first, a2 = shared[1].first;
    int b1 = shared[0].second, b2 = shared[1].second;
    // shared corners must form an edge of both squares
    require((a1 ^ a2) != 2 && (b1 ^ b2) != 2, ErrorCode::unsupported,
            "assembly: shared corners are diagonal");
    pc.kind = kEdge;
    pc.sym_a = st.directed_edge[a1][a2];
    pc.sym_b = st.directed_edge[b1][b2];
    return pc;
  }
  if (shared.size() == 1) {
    pc.kind = kVertex;
    pc.sym_a = shared[0].first;  // rotation c maps (0,0) to corner c
    pc.sym_b = shared[0].second;
    return pc;
  }
  pc.kind = kFar;
  double dist = (a.center - b.center).norm();
  double h = std::max({a.diam, b.diam, 1e-12 * mesh_h});
  double order = base_order - std::log2(std::max(dist / h, 1e-6));
  pc.far_order = std::clamp(static_cast<int>(std::ceil(order)), 3, max_order);
  return pc;
}

}  // namespace

GalerkinBlocks assemble_blocks(const geo::MultipatchSurface& surface,
                               const geo::SplineSpace& space, double kappa,
                               const QuadratureConfig& quad, int threads) {
  int n = space.dim();
  require(n <= quad.dof_cap, ErrorCode::invalid_argument,
          "assembly: dof count exceeds the dense-storage cap");
  int p = std::max(space.degree_u(), space.degree_v());
  int q_sing = quad.singular_order > 0 ? quad.singular_order : p + 4;
  int base = quad.regular_base > 0 ? quad.regular_base : p + 6;
  AssemblyPlan plan = build_plan(surface, space);
  const int ne = static_cast<int>(plan.elements.size());
  const int nloc = static_cast<int>(plan.elements[0].dofs.size());

  GalerkinBlocks blocks;
  blocks.v = MatrixXcd::Zero(n, n);
  blocks.k_adj = MatrixXcd::Zero(n, n);
  blocks.mass = MatrixXcd::Zero(n, n);

  // mass matrix, per element; rational geometries need the extra points
  {
    const auto& g = quad::gauss01(p + 4);
    std::vector<double> vals(nloc);
    int fu, fv;
    for (const auto& e : plan.elements) {
      const geo::NurbsPatch& patch = surface.patch(e.patch);
      for (std::size_t ia = 0; ia < g.x.size(); ++ia) {
        for (std::size_t ib = 0; ib < g.x.size(); ++ib) {
          double u = e.u0 + e.du * g.x[ia], v = e.v0 + e.dv * g.x[ib];
          geo::SurfaceFrame f = patch.frame(u, v);
          space.basis(e.patch, u, v, &fu, &fv, vals.data());
          double w = g.w[ia] * g.w[ib] * e.du * e.dv * f.measure;
          for (int la = 0; la < nloc; ++la)
            for (int lb = 0; lb < nloc; ++lb)
              blocks.mass(e.dofs[la], e.dofs[lb]) += w * vals[la] * vals[lb];
        }
      }
    }
  }

  // pair loop in fixed chunks: buffers are filled in parallel and scattered
  // serially in pair order so results are thread-count independent
  const std::int64_t npairs = static_cast<std::int64_t>(ne) * ne;
  const std::int64_t chunk = 2048;
  std::vector<std::vector<Complex>> buf_v(chunk), buf_k(chunk);
  for (std::int64_t start = 0; start < npairs; start += chunk) {
    std::int64_t count = std::min(chunk, npairs - start);
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t ci) {
      std::int64_t pair = start + static_cast<std::int64_t>(ci);
      const ElementData& ea = plan.elements[pair / ne];
      const ElementData& eb = plan.elements[pair % ne];
      PairClass pc = classify(ea, eb, base, quad.max_order, plan.h);
      const Table& table = cached_table(
          pc.kind, pc.kind == kFar ? pc.far_order : q_sing);
      std::vector<Complex>& av = buf_v[ci];
      std::vector<Complex>& ak = buf_k[ci];
      av.assign(static_cast<std::size_t>(nloc) * nloc, Complex(0, 0));
      ak.assign(static_cast<std::size_t>(nloc) * nloc, Complex(0, 0));
      const geo::NurbsPatch& pa = surface.patch(ea.patch);
      const geo::NurbsPatch& pb = surface.patch(eb.patch);
      std::vector<double> ba(nloc), bb(nloc);
      int fu, fv;
      double scale = ea.du * ea.dv * eb.du * eb.dv;
      for (const QuadPoint4& qp : table) {
        double xa1 = qp.x1, xa2 = qp.x2, yb1 = qp.y1, yb2 = qp.y2;
        if (pc.kind == kEdge || pc.kind == kVertex) {
          apply_sym(pc.sym_a, xa1, xa2);
          apply_sym(pc.sym_b, yb1, yb2);
        }
        double ua = ea.u0 + ea.du * xa1, va = ea.v0 + ea.dv * xa2;
        double ub = eb.u0 + eb.du * yb1, vb = eb.v0 + eb.dv * yb2;
        geo::SurfaceFrame fa = pa.frame(ua, va);
        geo::SurfaceFrame fb = pb.frame(ub, vb);
        Vector3d diff = fa.point - fb.point;
        double r = diff.norm();
        if (r < 1e-14) continue;  // touching quadrature points, weight ~ 0
        Complex eikr = std::exp(Complex(0.0, kappa * r));
        Complex slp = eikr / (4.0 * kPi * r);
        // adjoint double layer: dPhi(x,z)/dn_x with x on element a
        Complex adj = eikr * (Complex(0.0, kappa * r) - 1.0) /
                      (4.0 * kPi * r * r * r) * diff.dot(fa.normal);
        double w = qp.w * scale * fa.measure * fb.measure;
        space.basis(ea.patch, ua, va, &fu, &fv, ba.data());
        space.basis(eb.patch, ub, vb, &fu, &fv, bb.data());
        Complex wv = w * slp, wk = w * adj;
        for (int la = 0; la < nloc; ++la) {
          Complex cv = wv * ba[la], ck = wk * ba[la];
          for (int lb = 0; lb < nloc; ++lb) {
            av[la * nloc + lb] += cv * bb[lb];
            ak[la * nloc + lb] += ck * bb[lb];
          }
        }
      }
    });
    for (std::int64_t ci = 0; ci < count; ++ci) {
      std::int64_t pair = start + ci;
      const ElementData& ea = plan.elements[pair / ne];
      const ElementData& eb = plan.elements[pair % ne];
      for (int la = 0; la < nloc; ++la) {
        for (int lb = 0; lb < nloc; ++lb) {
          Complex cv = buf_v[ci][la * nloc + lb];
          Complex ck = buf_k[ci][la * nloc + lb];
          require(std::isfinite(cv.real()) && std::isfinite(cv.imag()) &&
                      std::isfinite(ck.real()) && std::isfinite(ck.imag()),
                  ErrorCode::numerics,
                  "assembly: non-finite entry for element pair (" +
                      std::to_string(pair / ne) + ", " +
                      std::to_string(pair % ne) + ")");
          blocks.v(ea.dofs[la], eb.dofs[lb]) += cv;
          blocks.k_adj(ea.dofs[la], eb.dofs[lb]) += ck;
        }
      }
    }
  }
  return blocks;
}

BemSystem assemble_cfie(const geo::MultipatchSurface& surface,
                        const geo::SplineSpace& space, const WaveContext& ctx,
                        const QuadratureConfig& quad, int threads) {
  GalerkinBlocks blocks =
      assemble_blocks(surface, space, ctx.kappa, quad, threads);
  BemSystem sys;
  sys.dofs = space.dim();
  sys.quad = quad;
  sys.matrix = 0.5 * blocks.mass + blocks.k_adj -
               Complex(0.0, ctx.eta) * blocks.v;
  return sys;
}

DensitySolution solve_density(const BemSystem& system, const WaveContext& ctx,
                              const geo::MultipatchSurface& surface,
                              const geo::SplineSpace& space, int threads) {
  (void)threads;
  int n = space.dim();
  require(system.matrix.rows() == n, ErrorCode::invalid_argument,
          "solve_density: system does not match the space");
  int p = std::max(space.degree_u(), space.degree_v());
  const auto& g = quad::gauss01(p + 4);
  geo::ElementMesh mesh = geo::ElementMesh::build(surface, space.level());
  VectorXcd rhs = VectorXcd::Zero(n);
  int nloc = (space.degree_u() + 1) * (space.degree_v() + 1);
  std::vector<double> vals(nloc);
  for (const auto& e : mesh.elements) {
    const geo::NurbsPatch& patch = surface.patch(e.patch);
    double du = e.u1 - e.u0, dv = e.v1 - e.v0;
    for (std::size_t ia = 0; ia < g.x.size(); ++ia) {
      for (std::size_t ib = 0; ib < g.x.size(); ++ib) {
        double u = e.u0 + du * g.x[ia], v = e.v0 + dv * g.x[ib];
        geo::SurfaceFrame f = patch.frame(u, v);
        auto [uinc, dn] = incident_trace(ctx, f.point, f.normal);
        Complex f_val = dn - Complex(0.0, ctx.eta) * uinc;
        int fu, fv;
        space.basis(e.patch, u, v, &fu, &fv, vals.data());
        double w = g.w[ia] * g.w[ib] * du * dv * f.measure;
        for (int j = 0; j <= space.degree_v(); ++j)
          for (int i = 0; i <= space.degree_u(); ++i)
            rhs(space.global_index(e.patch, fu + i, fv + j)) +=
                w * vals[j * (space.degree_u() + 1) + i] * f_val;
      }
    }
  }
  Eigen::PartialPivLU<MatrixXcd> lu(system.matrix);
  DensitySolution sol;
  sol.coefficients = lu.solve(rhs);
  sol.level = space.level();
  double rhs_norm = rhs.norm();
  sol.residual = rhs_norm > 0.0
                     ? (system.matrix * sol.coefficients - rhs).norm() / rhs_norm
                     : 0.0;
  require(std::isfinite(sol.residual) && sol.residual <= 1e-8,
          ErrorCode::numerics, "solve_density: solver failed (residual)");
  return sol;
}

namespace {

template <class Kernel>
Complex integrate_over_surface(const VectorXcd& density,
                               const geo::MultipatchSurface& surface,
                               const geo::SplineSpace& space,
                               const geo::ElementMesh& mesh, const Vector3d& x,
                               const Kernel& kernel, bool* warning) {
  int p = std::max(space.degree_u(), space.degree_v());
  const auto& g = quad::gauss01(p + 3);
  int pu = space.degree_u(), pv = space.degree_v();
  int nloc = (pu + 1) * (pv + 1);
  std::vector<double> vals(nloc);
  Complex total = 0.0;
  if (warning) *warning = false;
  for (const auto& e : mesh.elements) {
    const geo::NurbsPatch& patch = surface.patch(e.patch);
    if (warning) {
      double dist = (x - e.center).norm() - e.diam;
      if (dist < e.diam) *warning = true;
    }
    // adaptive subdivision keeps the quadrature separated from the kernel
    // peak; the effective order grows like log(1/dist)
    struct Cell {
      double u0, u1, v0, v1;
      int depth;
    };
    std::vector<Cell> stack{{e.u0, e.u1, e.v0, e.v1, 0}};
    while (!stack.empty()) {
      Cell c = stack.back();
      stack.pop_back();
      double um = 0.5 * (c.u0 + c.u1), vm = 0.5 * (c.v0 + c.v1);
      Vector3d center = patch.eval(um, vm);
      Vector3d corner = patch.eval(c.u0, c.v0);
      double diam = 2.0 * (corner - center).norm();
      if (c.depth < 4 && (x - center).norm() < 1.5 * diam) {
        stack.push_back({c.u0, um, c.v0, vm, c.depth + 1});
        stack.push_back({um, c.u1, c.v0, vm, c.depth + 1});
        stack.push_back({c.u0, um, vm, c.v1, c.depth + 1});
        stack.push_back({um, c.u1, vm, c.v1, c.depth + 1});
        continue;
      }
      double du = c.u1 - c.u0, dv = c.v1 - c.v0;
      for (std::size_t ia = 0; ia < g.x.size(); ++ia) {
        for (std::size_t ib = 0; ib < g.x.size(); ++ib) {
          double u = c.u0 + du * g.x[ia], v = c.v0 + dv * g.x[ib];
          geo::SurfaceFrame f = patch.frame(u, v);
          int fu, fv;
          space.basis(e.patch, u, v, &fu, &fv, vals.data());
          Complex rho = 0.0;
          for (int j = 0; j <= pv; ++j)
            for (int i = 0; i <= pu; ++i)
              rho += vals[j * (pu + 1) + i] *
                     density(space.global_index(e.patch, fu + i, fv + j));
          total += g.w[ia] * g.w[ib] * du * dv * f.measure *
                   kernel(f.point, f.normal) * rho;
        }
      }
    }
  }
  return total;
}

}  // namespace

PotentialValue eval_potential(const VectorXcd& density,
                              const geo::MultipatchSurface& surface,
                              const geo::SplineSpace& space,
                              const WaveContext& ctx, const Vector3d& x) {
  return PotentialEvaluator(density, surface, space, ctx).scattered(x);
}

PotentialValue eval_potential_normal_derivative(
    const VectorXcd& density, const geo::MultipatchSurface& surface,
    const geo::SplineSpace& space, const WaveContext& ctx, const Vector3d& x,
    const Vector3d& n_x) {
  return PotentialEvaluator(density, surface, space, ctx)
      .scattered_normal_derivative(x, n_x);
}

namespace detail {
std::vector<std::array<double, 5>> quadrature_table(int kind, int q) {
  const Table& t = cached_table(static_cast<TableKind>(kind), q);
  std::vector<std::array<double, 5>> out;
  out.reserve(t.size());
  for (const QuadPoint4& p : t) out.push_back({p.x1, p.x2, p.y1, p.y2, p.w});
  return out;
}
}  // namespace detail

PotentialEvaluator::PotentialEvaluator(const VectorXcd& density,
                                       const geo::MultipatchSurface& surface,
                                       const geo::SplineSpace& space,
                                       const WaveContext& ctx)
    : density_(density),
      surface_(surface),
      space_(space),
      ctx_(ctx),
      mesh_(geo::ElementMesh::build(surface, space.level())) {}

PotentialValue PotentialEvaluator::scattered(const Vector3d& x) const {
  PotentialValue out;
  double kappa = ctx_.kappa;
  out.value = -integrate_over_surface(
      density_, surface_, space_, mesh_, x,
      [&](const Vector3d& z, const Vector3d&) {
        return helmholtz_kernel(kappa, x, z);
      },
      &out.accuracy_warning);
  return out;
}

PotentialValue PotentialEvaluator::scattered_normal_derivative(
    const Vector3d& x, const Vector3d& n_x) const {
  PotentialValue out;
  double kappa = ctx_.kappa;
  out.value = -integrate_over_surface(
      density_, surface_, space_, mesh_, x,
      [&](const Vector3d& z, const Vector3d&) {
        // dPhi(x,z)/dn_x
        Vector3d diff = x - z;
        double r = diff.norm();
        Complex factor = std::exp(Complex(0.0, kappa * r)) *
                         (Complex(0.0, kappa * r) - 1.0) /
                         (4.0 * kPi * r * r * r);
        return factor * diff.dot(n_x);
      },
      &out.accuracy_warning);
  return out;
}

}  // namespace bem
}  // namespace scatuq
