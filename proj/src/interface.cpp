#include "interface.hpp"

#include <cmath>

#include "quadrature.hpp"

namespace scatuq {
namespace iface {

InterfaceGrid::InterfaceGrid(geo::MultipatchSurface surface, int nodes_per_dir,
                             int quad_order)
    : surface_(std::move(surface)), npd_(nodes_per_dir),
      quad_order_(quad_order) {
  require(npd_ >= 2, ErrorCode::invalid_argument,
          "InterfaceGrid: need at least 2 nodes per direction");
  require(quad_order_ >= 2, ErrorCode::invalid_argument,
          "InterfaceGrid: quadrature order too small");
  // Chebyshev-Gauss-Lobatto nodes on [0,1] and barycentric weights
  nodes_1d_.resize(npd_);
  bary_.resize(npd_);
  for (int j = 0; j < npd_; ++j) {
    nodes_1d_[j] = 0.5 * (1.0 - std::cos(kPi * j / (npd_ - 1)));
    bary_[j] = (j % 2 == 0 ? 1.0 : -1.0) *
               ((j == 0 || j == npd_ - 1) ? 0.5 : 1.0);
  }
  nodes_1d_.front() = 0.0;
  nodes_1d_.back() = 1.0;

  const auto& gauss = quad::gauss01(quad_order_);
  int m = surface_.num_patches();
  for (int p = 0; p < m; ++p) {
    const geo::NurbsPatch& patch = surface_.patch(p);
    for (int j = 0; j < npd_; ++j) {
      for (int i = 0; i < npd_; ++i) {
        geo::SurfaceFrame f = patch.frame(nodes_1d_[i], nodes_1d_[j]);
        node_point_.push_back(f.point);
        node_normal_.push_back(f.normal);
      }
    }
    for (int j = 0; j < quad_order_; ++j) {
      for (int i = 0; i < quad_order_; ++i) {
        geo::SurfaceFrame f = patch.frame(gauss.x[i], gauss.x[j]);
        quad_point_.push_back(f.point);
        quad_normal_.push_back(f.normal);
        quad_weight_.push_back(gauss.w[i] * gauss.w[j] * f.measure);
      }
    }
    double d = 0.0;
    Vector3d c00 = patch.eval(0, 0), c11 = patch.eval(1, 1);
    Vector3d c10 = patch.eval(1, 0), c01 = patch.eval(0, 1);
    d = std::max((c00 - c11).norm(), (c10 - c01).norm());
    patch_diam_ = std::max(patch_diam_, d);
  }
  // interpolation matrix node values -> quadrature values (any patch)
  node_to_quad_.resize(quad_order_ * quad_order_, npd_ * npd_);
  for (int j = 0; j < quad_order_; ++j)
    for (int i = 0; i < quad_order_; ++i)
      node_to_quad_.row(j * quad_order_ + i) =
          lagrange_row(gauss.x[i], gauss.x[j]);
  surface_.bounding_box(&box_lo_, &box_hi_);
}

Eigen::RowVectorXd InterfaceGrid::lagrange_row(double u, double v) const {
  auto cardinal = [&](double t, std::vector<double>& out) {
    out.assign(npd_, 0.0);
    for (int j = 0; j < npd_; ++j) {
      if (std::abs(t - nodes_1d_[j]) < 1e-14) {
        out[j] = 1.0;
        return;
      }
    }
    double denom = 0.0;
    for (int j = 0; j < npd_; ++j) {
      out[j] = bary_[j] / (t - nodes_1d_[j]);
      denom += out[j];
    }
    for (int j = 0; j < npd_; ++j) out[j] /= denom;
  };
  std::vector<double> lu, lv;
  cardinal(u, lu);
  cardinal(v, lv);
  Eigen::RowVectorXd row(npd_ * npd_);
  for (int j = 0; j < npd_; ++j)
    for (int i = 0; i < npd_; ++i) row(j * npd_ + i) = lu[i] * lv[j];
  return row;
}

int InterfaceGrid::midpoint_node(int patch) const {
  require(npd_ % 2 == 1, ErrorCode::invalid_argument,
          "midpoint_node: even node counts have no midpoint node");
  int mid = npd_ / 2;
  return patch * npd_ * npd_ + mid * npd_ + mid;
}

void InterfaceGrid::check_enclosure(const geo::MultipatchSurface& deformed,
                                    double margin) const {
  Vector3d lo, hi;
  deformed.bounding_box(&lo, &hi);
  bool ok = (lo - box_lo_).minCoeff() >= margin &&
            (box_hi_ - hi).minCoeff() >= margin;
  require(ok, ErrorCode::sample_rejected,
          "sample rejected: deformed surface is not strictly enclosed by the "
          "artificial interface");
}

void InterfaceGrid::require_exterior(const Vector3d& x) const {
  bool inside_box = (x - box_lo_).minCoeff() > 0.0 &&
                    (box_hi_ - x).minCoeff() > 0.0;
  require(!inside_box, ErrorCode::invalid_argument,
          "evaluation point lies inside the artificial interface");
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& q : quad_point_) dist = std::min(dist, (x - q).norm());
  require(dist >= patch_diam_, ErrorCode::invalid_argument,
          "evaluation point closer to the interface than one patch diameter");
}

std::uint64_t InterfaceGrid::content_hash() const {
  std::uint64_t h = surface_.content_hash();
  int meta[2] = {npd_, quad_order_};
  return fnv1a(meta, sizeof(meta), h);
}

CauchyData sample_cauchy(const bem::DensitySolution& density,
                         const geo::MultipatchSurface& scatterer,
                         const geo::SplineSpace& space,
                         const bem::WaveContext& ctx, const InterfaceGrid& grid,
                         int threads) {
  grid.check_enclosure(scatterer);
  bem::PotentialEvaluator eval(density.coefficients, scatterer, space, ctx);
  CauchyData data(grid.num_nodes());
  parallel_for(grid.num_nodes(), threads, [&](std::size_t n) {
    int i = static_cast<int>(n);
    data.trace(i) = eval.scattered(grid.node_point(i)).value;
    data.dtrace(i) =
        eval.scattered_normal_derivative(grid.node_point(i),
                                         grid.node_normal(i))
            .value;
  });
  return data;
}

Complex interp_trace(const CauchyData& data, const InterfaceGrid& grid,
                     int patch, double u, double v, bool normal_trace) {
  int nn = grid.nodes_per_dir() * grid.nodes_per_dir();
  Eigen::RowVectorXd row = grid.lagrange_row(u, v);
  const VectorXcd& src = normal_trace ? data.dtrace : data.trace;
  return row * src.segment(patch * nn, nn);
}

void kernel_rows(const InterfaceGrid& grid, double kappa, const Vector3d& x,
                 VectorXcd* a, VectorXcd* b) {
  int nn = grid.nodes_per_dir() * grid.nodes_per_dir();
  int nq = grid.quad_order() * grid.quad_order();
  int m = grid.surface().num_patches();
  a->setZero(m * nn);
  b->setZero(m * nn);
  for (int p = 0; p < m; ++p) {
    VectorXcd slp(nq), dlp(nq);
    for (int q = 0; q < nq; ++q) {
      int qg = p * nq + q;
      double w = grid.quad_weight(qg);
      slp(q) = -w * bem::helmholtz_kernel(kappa, x, grid.quad_point(qg));
      dlp(q) = w * bem::dlp_kernel(kappa, x, grid.quad_point(qg),
                                   grid.quad_normal(qg));
    }
    a->segment(p * nn, nn) = grid.node_to_quad().transpose() * slp;
    b->segment(p * nn, nn) = grid.node_to_quad().transpose() * dlp;
  }
}

Complex eval_from_interface(const CauchyData& data, const InterfaceGrid& grid,
                            const bem::WaveContext& ctx, const Vector3d& x) {
  grid.require_exterior(x);
  VectorXcd a, b;
  kernel_rows(grid, ctx.kappa, x, &a, &b);
  return a.cwiseProduct(data.dtrace).sum() + b.cwiseProduct(data.trace).sum();
}

void SecondMomentData::accumulate(const CauchyData& data, double weight) {
  require(data.trace.size() == cor_u.rows(), ErrorCode::invalid_argument,
          "second moment: dimension mismatch");
  cor_dn += weight * data.dtrace * data.dtrace.adjoint();
  cor_dn_u += weight * data.dtrace * data.trace.adjoint();
  cor_u_dn += weight * data.trace * data.dtrace.adjoint();
  cor_u += weight * data.trace * data.trace.adjoint();
}

void SecondMomentData::accumulate_difference(const CauchyData& fine,
                                             const CauchyData& coarse,
                                             double weight) {
  accumulate(fine, weight);
  accumulate(coarse, -weight);
}

void SecondMomentData::axpy(double a, const SecondMomentData& other) {
  cor_dn += a * other.cor_dn;
  cor_dn_u += a * other.cor_dn_u;
  cor_u_dn += a * other.cor_u_dn;
  cor_u += a * other.cor_u;
}

double SecondMomentData::linf() const {
  if (cor_u.size() == 0) return 0.0;
  return std::max({cor_dn.cwiseAbs().maxCoeff(), cor_dn_u.cwiseAbs().maxCoeff(),
                   cor_u_dn.cwiseAbs().maxCoeff(),
                   cor_u.cwiseAbs().maxCoeff()});
}

Complex correlation_at(const SecondMomentData& second,
                       const InterfaceGrid& grid, const bem::WaveContext& ctx,
                       const Vector3d& x, const Vector3d& x_prime) {
  VectorXcd a1, b1, a2, b2;
  grid.require_exterior(x);
  grid.require_exterior(x_prime);
  kernel_rows(grid, ctx.kappa, x, &a1, &b1);
  kernel_rows(grid, ctx.kappa, x_prime, &a2, &b2);
  // E[u(x) conj(u(x'))] with u = a . nu + b . tau
  Complex out = 0.0;
  out += a1.cwiseProduct(second.cor_dn * a2.conjugate()).sum();
  out += a1.cwiseProduct(second.cor_dn_u * b2.conjugate()).sum();
  out += b1.cwiseProduct(second.cor_u_dn * a2.conjugate()).sum();
  out += b1.cwiseProduct(second.cor_u * b2.conjugate()).sum();
  return out;
}

VarianceValue variance_at(const SecondMomentData& second,
                          const CauchyData& mean, const InterfaceGrid& grid,
                          const bem::WaveContext& ctx, const Vector3d& x) {
  Complex cor = correlation_at(second, grid, ctx, x, x);
  Complex mean_val = eval_from_interface(mean, grid, ctx, x);
  VarianceValue out;
  out.value = cor.real() - std::norm(mean_val);
  out.imag_residual = std::abs(cor.imag());
  return out;
}

}  // namespace iface
}  // namespace scatuq
