#ifndef SCATUQ_INTERFACE_HPP_
#define SCATUQ_INTERFACE_HPP_

#include "bem.hpp"

namespace scatuq {
namespace iface {

/// Fixed artificial interface with per-patch tensor interpolation nodes
/// (Chebyshev-Gauss-Lobatto, degree nodes_per_dir - 1) and a per-patch tensor
/// Gauss rule acting on the interpolants. Immutable after construction.
class InterfaceGrid {
 public:
  explicit InterfaceGrid(geo::MultipatchSurface surface, int nodes_per_dir = 7,
                         int quad_order = 8);

  const geo::MultipatchSurface& surface() const { return surface_; }
  int nodes_per_dir() const { return npd_; }
  int quad_order() const { return quad_order_; }
  int num_nodes() const { return static_cast<int>(node_point_.size()); }
  int num_quad() const { return static_cast<int>(quad_point_.size()); }

  const Vector3d& node_point(int n) const { return node_point_[n]; }
  const Vector3d& node_normal(int n) const { return node_normal_[n]; }
  const Vector3d& quad_point(int q) const { return quad_point_[q]; }
  const Vector3d& quad_normal(int q) const { return quad_normal_[q]; }
  double quad_weight(int q) const { return quad_weight_[q]; }

  /// Interpolation matrix from one patch's nodal values to its quadrature
  /// values; identical for every patch.
  const MatrixXd& node_to_quad() const { return node_to_quad_; }

  /// Row of Lagrange cardinal values at (u,v), ordered like the patch nodes.
  Eigen::RowVectorXd lagrange_row(double u, double v) const;

  /// Patch midpoint node index (observation points live there).
  int midpoint_node(int patch) const;

  /// Conservative bounding-box enclosure check on control points.
  void check_enclosure(const geo::MultipatchSurface& deformed,
                       double margin = 1e-3) const;

  /// Distance guard for exterior evaluation.
  void require_exterior(const Vector3d& x) const;

  std::uint64_t content_hash() const;

 private:
  geo::MultipatchSurface surface_;
  int npd_;
  int quad_order_;
  std::vector<double> nodes_1d_;
  std::vector<double> bary_;  // barycentric weights
  std::vector<Vector3d> node_point_, node_normal_;
  std::vector<Vector3d> quad_point_, quad_normal_;
  std::vector<double> quad_weight_;
  MatrixXd node_to_quad_;
  Vector3d box_lo_, box_hi_;
  double patch_diam_ = 0.0;
};

/// Cauchy data of the scattered wave at the interface nodes: u_s (trace) and
/// du_s/dn (dtrace), plus the degree-(npd-1) interpolants they induce.
struct CauchyData {
  VectorXcd trace;
  VectorXcd dtrace;

  CauchyData() = default;
  explicit CauchyData(int n)
      : trace(VectorXcd::Zero(n)), dtrace(VectorXcd::Zero(n)) {}
  void axpy(double a, const CauchyData& other) {
    trace += a * other.trace;
    dtrace += a * other.dtrace;
  }
  void scale(double a) {
    trace *= a;
    dtrace *= a;
  }
  double linf() const {
    double t = trace.size() ? trace.cwiseAbs().maxCoeff() : 0.0;
    double d = dtrace.size() ? dtrace.cwiseAbs().maxCoeff() : 0.0;
    return std::max(t, d);
  }
};

/// Nodal Cauchy data of one density solution, evaluated through the exterior
/// representation from the scatterer surface. Throws sample_rejected when the
/// deformed scatterer is not strictly enclosed.
CauchyData sample_cauchy(const bem::DensitySolution& density,
                         const geo::MultipatchSurface& scatterer,
                         const geo::SplineSpace& space,
                         const bem::WaveContext& ctx, const InterfaceGrid& grid,
                         int threads = 1);

/// Interpolant evaluation of either trace at an arbitrary interface point.
Complex interp_trace(const CauchyData& data, const InterfaceGrid& grid,
                     int patch, double u, double v, bool normal_trace);

/// Exterior evaluation through the interface Cauchy data,
/// u_s(x) = int_T { dPhi/dn_z u_s - Phi du_s/dn } dsigma_z with the outward
/// normal of T.
Complex eval_from_interface(const CauchyData& data, const InterfaceGrid& grid,
                            const bem::WaveContext& ctx, const Vector3d& x);

/// Kernel-weight rows such that u_s(x) = a . dtrace + b . trace; the building
/// block shared by eval_from_interface and the correlation transport.
void kernel_rows(const InterfaceGrid& grid, double kappa, const Vector3d& x,
                 VectorXcd* a, VectorXcd* b);

/// Four nodal second-moment blocks of the Cauchy data.
struct SecondMomentData {
  MatrixXcd cor_dn;    // E[nu nu^H]
  MatrixXcd cor_dn_u;  // E[nu tau^H]
  MatrixXcd cor_u_dn;  // E[tau nu^H]
  MatrixXcd cor_u;     // E[tau tau^H]

  SecondMomentData() = default;
  explicit SecondMomentData(int n)
      : cor_dn(MatrixXcd::Zero(n, n)),
        cor_dn_u(MatrixXcd::Zero(n, n)),
        cor_u_dn(MatrixXcd::Zero(n, n)),
        cor_u(MatrixXcd::Zero(n, n)) {}
  int size() const { return static_cast<int>(cor_u.rows()); }

  /// Rank-1 update acc += weight * data (x) conj(data) per block pairing.
  void accumulate(const CauchyData& data, double weight);
  /// acc += weight * (fine (x) fine - coarse (x) coarse).
  void accumulate_difference(const CauchyData& fine, const CauchyData& coarse,
                             double weight);
  void axpy(double a, const SecondMomentData& other);
  double linf() const;
};

/// Correlation of the scattered wave at two exterior points from the nodal
/// second moments (the four-kernel-pair double surface quadrature).
Complex correlation_at(const SecondMomentData& second,
                       const InterfaceGrid& grid, const bem::WaveContext& ctx,
                       const Vector3d& x, const Vector3d& x_prime);

struct VarianceValue {
  double value;
  double imag_residual;
};

/// V[u_s](x) = Cor(x,x) - |E[u_s](x)|^2.
VarianceValue variance_at(const SecondMomentData& second,
                          const CauchyData& mean, const InterfaceGrid& grid,
                          const bem::WaveContext& ctx, const Vector3d& x);

}  // namespace iface
}  // namespace scatuq

#endif  // SCATUQ_INTERFACE_HPP_
