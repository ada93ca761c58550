#ifndef SCATUQ_SPLINE_SPACE_HPP_
#define SCATUQ_SPLINE_SPACE_HPP_

#include <Eigen/Sparse>

#include "geometry.hpp"

namespace scatuq {
namespace geo {

/// Scalar spline space over a multipatch surface.
///
/// Two flavors are used throughout:
///  - patchwise-discontinuous plain B-splines on uniform dyadic knots
///    (densities in H^{-1/2} need no continuity), and
///  - globally continuous rational splines on the degree-matched geometry
///    (surface displacements; edge and vertex coefficients are identified
///    across glued patches exactly once).
class SplineSpace {
 public:
  static SplineSpace discontinuous(const MultipatchSurface& s, int degree,
                                   int level);
  static SplineSpace continuous(const MultipatchSurface& s, int degree,
                                int level);

  const MultipatchSurface& surface() const { return *surface_; }
  int degree_u() const { return pu_; }
  int degree_v() const { return pv_; }
  int level() const { return level_; }
  bool is_continuous() const { return continuous_; }
  bool is_rational() const { return rational_; }

  int dim() const { return dim_; }
  int local_dim() const { return local_dim_; }
  int patch_nu(int p) const;
  int patch_nv(int p) const;
  int local_offset(int p) const { return offsets_[p]; }
  int global_index(int p, int i, int j) const {
    return local_to_global_[offsets_[p] + j * patch_nu(p) + i];
  }
  int global_index_of_local(int local) const { return local_to_global_[local]; }

  const KnotVector& knots_u(int p) const;
  const KnotVector& knots_v(int p) const;

  /// Prepared geometry patch carrying the weights and knots of this space;
  /// only available for continuous (rational) spaces.
  const NurbsPatch& level_patch(int p) const;

  /// Values of the (pu+1)*(pv+1) basis functions that are nonzero at (u,v),
  /// row-major with the u index fastest; reports the first tensor indices.
  void basis(int p, double u, double v, int* first_u, int* first_v,
             double* values) const;

  /// Integration cells per patch: spans of the space's knot vectors.
  struct Cell {
    int patch;
    double u0, u1, v0, v1;
  };
  const std::vector<Cell>& cells() const { return cells_; }

  /// Local-to-global matrix T with global Galerkin matrix = T A_local T^T.
  Eigen::SparseMatrix<double> local_to_global_matrix() const;

 private:
  const MultipatchSurface* surface_ = nullptr;
  int pu_ = 0, pv_ = 0, level_ = 0;
  bool continuous_ = false, rational_ = false;
  int dim_ = 0, local_dim_ = 0;
  std::vector<int> offsets_;
  std::vector<int> local_to_global_;
  std::vector<KnotVector> knots_u_, knots_v_;  // per patch
  std::vector<NurbsPatch> level_patches_;      // continuous spaces only
  std::vector<Cell> cells_;

  void build_cells();
};

}  // namespace geo
}  // namespace scatuq

#endif  // SCATUQ_SPLINE_SPACE_HPP_
