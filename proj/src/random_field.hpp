#ifndef SCATUQ_RANDOM_FIELD_HPP_
#define SCATUQ_RANDOM_FIELD_HPP_

#include <Eigen/Sparse>
#include <functional>
#include <string>

#include "spline_space.hpp"

namespace scatuq {
namespace rf {

/// 3x3 matrix-valued covariance kernel, symmetric in its arguments.
struct MatrixKernel {
  std::string name;
  double amplitude = 0.0;
  double length = 0.0;
  std::function<Matrix3d(const Vector3d&, const Vector3d&)> eval;
};

/// k(x,x') = a * exp(-|x-x'|^2 / s) * I3
MatrixKernel gaussian_kernel(double amplitude, double length);

/// Scalar mass matrix M_ij = int_S phi_i phi_j dsigma by per-cell tensor
/// Gauss quadrature. Throws on a non-SPD result.
Eigen::SparseMatrix<double> assemble_mass(const geo::SplineSpace& space,
                                          int quad_order, int threads = 1);

struct LowRankFactor {
  MatrixXd l;            // n x m with C ~ L L^T
  double trace_error;    // remaining diagonal l1 mass at termination
  double initial_trace;  // trace of the operator
  std::vector<int> pivots;
};

/// Greedy diagonally pivoted Cholesky on an abstract SPD operator. Stops when
/// the remaining diagonal mass drops below tol * trace or max_rank is hit.
LowRankFactor pivoted_cholesky_operator(
    int n, const std::function<void(double*)>& diagonal,
    const std::function<void(int, double*)>& column, double tol,
    int max_rank = -1);

/// Covariance factor of the kernel over the vector-valued space [space]^3.
/// The factorization runs on the patchwise shape functions and is mapped to
/// the continuous space through the local-to-global matrix, L = T L_star.
/// Vector dofs are component-blocked: dof = component * dim + scalar_index.
LowRankFactor pivoted_cholesky(const MatrixKernel& kernel,
                               const geo::SplineSpace& space, double tol,
                               int quad_order, int threads = 1,
                               int max_rank = -1);

/// Solves L^T M^{-1} L psi = lambda psi and recovers M-orthonormal modes
/// chi_k = M^{-1} L psi_k / sqrt(lambda_k); eigenvalues descending, zero
/// eigenvalues dropped. The mass matrix is the scalar one; the vector mass
/// is its threefold block diagonal.
std::pair<std::vector<double>, MatrixXd> reduced_eig(
    const LowRankFactor& lr, const Eigen::SparseMatrix<double>& scalar_mass);

/// Smallest count with sum_{k<count} lambda_k >= trace_frac * sum lambda.
int truncate_count(const std::vector<double>& lambda, double trace_frac);

/// Surface Karhunen-Loeve expansion of the deformation field.
struct KLExpansion {
  const geo::MultipatchSurface* surface = nullptr;
  geo::SplineSpace space;       // scalar continuous space
  std::vector<double> eigenvalues;  // descending, size rank()
  MatrixXd modes;               // (3*space.dim()) x rank, M-orthonormal
  VectorXd mean;                // mean deformation coefficients, zero default

  int rank() const { return static_cast<int>(eigenvalues.size()); }
  int parameter_dimension() const { return rank(); }

  Vector3d mode_value(int k, int patch, double u, double v) const;
  /// Displacement field sum_k sqrt(lambda_k) y_k chi_k + mean at a point.
  Vector3d displacement(int patch, double u, double v,
                        const std::vector<double>& y) const;
};

struct KLBuildOptions {
  int degree = 2;
  int level = 1;
  double chol_tol = 1e-6;
  double trace_frac = 0.99;
  int max_modes = -1;  // unlimited when negative
  int quad_order = 0;  // 0 -> degree + 2
  int threads = 1;
};

KLExpansion build_kl(const geo::MultipatchSurface& surface,
                     const MatrixKernel& kernel, const KLBuildOptions& opts);

/// Deformed surface with the displacement added to the control points of the
/// degree/knot-matched geometry. Throws sample_rejected when the deformed
/// surface has nonpositive measure at a validation grid.
geo::MultipatchSurface deform_surface(const KLExpansion& kl,
                                      const std::vector<double>& y);

}  // namespace rf
}  // namespace scatuq

#endif  // SCATUQ_RANDOM_FIELD_HPP_
