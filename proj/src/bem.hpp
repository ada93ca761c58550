#ifndef SCATUQ_BEM_HPP_
#define SCATUQ_BEM_HPP_

#include <optional>

#include "spline_space.hpp"

namespace scatuq {
namespace bem {

/// Wavenumber, incident direction, and the combined-field coupling eta.
struct WaveContext {
  double kappa;
  Vector3d direction;
  double eta;

  WaveContext(double kappa_, const Vector3d& d,
              std::optional<double> eta_ = std::nullopt)
      : kappa(kappa_), direction(d), eta(eta_ ? *eta_ : kappa_ / 2.0) {
    require(kappa > 0.0, ErrorCode::invalid_argument, "wavenumber must be > 0");
    require(std::abs(direction.norm() - 1.0) <= 1e-14,
            ErrorCode::invalid_argument, "incident direction must be unit");
  }
};

/// Helmholtz fundamental solution exp(i kappa r) / (4 pi r); kappa = 0 gives
/// the Laplace kernel.
Complex helmholtz_kernel(double kappa, const Vector3d& x, const Vector3d& z);

/// Normal derivative in the second argument, <grad_z Phi, n_z>.
Complex dlp_kernel(double kappa, const Vector3d& x, const Vector3d& z,
                   const Vector3d& n_z);

/// (u_inc, du_inc/dn) of the plane wave exp(i kappa <d, x>).
std::pair<Complex, Complex> incident_trace(const WaveContext& ctx,
                                           const Vector3d& x,
                                           const Vector3d& n);

struct QuadratureConfig {
  int singular_order = 0;  // points per direction for the regularized rules;
                           // 0 selects degree + 4
  int regular_base = 0;    // base order for separated pairs; 0 -> degree + 2
  int max_order = 12;
  int dof_cap = 12000;     // dense storage guard
};

/// Galerkin blocks over the patchwise-discontinuous boundary space:
/// single layer V, adjoint double layer K* (kernel dPhi/dn_x), and the
/// boundary mass matrix.
struct GalerkinBlocks {
  MatrixXcd v;
  MatrixXcd k_adj;
  MatrixXcd mass;
};

GalerkinBlocks assemble_blocks(const geo::MultipatchSurface& surface,
                               const geo::SplineSpace& space, double kappa,
                               const QuadratureConfig& quad, int threads = 1);

struct BemSystem {
  MatrixXcd matrix;  // (1/2) M + K* - i eta V
  int dofs = 0;
  QuadratureConfig quad;
};

BemSystem assemble_cfie(const geo::MultipatchSurface& surface,
                        const geo::SplineSpace& space, const WaveContext& ctx,
                        const QuadratureConfig& quad, int threads = 1);

/// Coefficients of du/dn of the total wave on the boundary space.
struct DensitySolution {
  VectorXcd coefficients;
  int level = 0;
  std::vector<double> parameter;
  double residual = 0.0;
};

DensitySolution solve_density(const BemSystem& system, const WaveContext& ctx,
                              const geo::MultipatchSurface& surface,
                              const geo::SplineSpace& space, int threads = 1);

struct PotentialValue {
  Complex value;
  bool accuracy_warning = false;  // closer to S than one element diameter
};

/// Scattered wave u_s(x) = -int_S Phi(x,z) du/dn(z) dsigma_z evaluated by
/// per-element quadrature with adaptive near-field subdivision. The minus
/// sign belongs to the representation of the scattered (not total) wave for
/// sound-soft obstacles.
PotentialValue eval_potential(const VectorXcd& density,
                              const geo::MultipatchSurface& surface,
                              const geo::SplineSpace& space,
                              const WaveContext& ctx, const Vector3d& x);

/// du_s/dn(x) = -int_S dPhi(x,z)/dn_x du/dn(z) dsigma_z.
PotentialValue eval_potential_normal_derivative(
    const VectorXcd& density, const geo::MultipatchSurface& surface,
    const geo::SplineSpace& space, const WaveContext& ctx, const Vector3d& x,
    const Vector3d& n_x);

/// Potential evaluation bound to one density; reuses the element mesh across
/// many evaluation points.
class PotentialEvaluator {
 public:
  PotentialEvaluator(const VectorXcd& density,
                     const geo::MultipatchSurface& surface,
                     const geo::SplineSpace& space, const WaveContext& ctx);
  PotentialValue scattered(const Vector3d& x) const;
  PotentialValue scattered_normal_derivative(const Vector3d& x,
                                             const Vector3d& n_x) const;

 private:
  const VectorXcd& density_;
  const geo::MultipatchSurface& surface_;
  const geo::SplineSpace& space_;
  WaveContext ctx_;
  geo::ElementMesh mesh_;
};

namespace detail {
/// Parameter-domain quadrature tables behind the singular assembly, exposed
/// for verification: kind 0 coincident, 1 edge-adjacent, 2 vertex-adjacent,
/// 3 separated tensor rule. Entries are (x1, x2, y1, y2, weight) and sum any
/// smooth integrand over the 4-cube.
std::vector<std::array<double, 5>> quadrature_table(int kind, int q);
}  // namespace detail

}  // namespace bem
}  // namespace scatuq

#endif  // SCATUQ_BEM_HPP_
