#ifndef SCATUQ_GEOMETRY_HPP_
#define SCATUQ_GEOMETRY_HPP_

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "splines.hpp"

namespace scatuq {
namespace geo {

using splines::KnotVector;

struct SurfaceFrame {
  Vector3d point;
  Vector3d normal;  // unit, oriented by the patch orientation flag
  double measure;   // norm of the cross product of the parametric tangents
};

/// Tensor-product NURBS patch over the unit square. Control data is kept in
/// homogeneous form (w*x, w*y, w*z, w) so knot insertion and degree elevation
/// act linearly on the net.
class NurbsPatch {
 public:
  NurbsPatch() = default;
  NurbsPatch(KnotVector ku, KnotVector kv, std::vector<Vector3d> control,
             std::vector<double> weights);

  const KnotVector& knots_u() const { return ku_; }
  const KnotVector& knots_v() const { return kv_; }
  int num_u() const { return ku_.num_basis(); }
  int num_v() const { return kv_.num_basis(); }
  int degree_u() const { return ku_.degree(); }
  int degree_v() const { return kv_.degree(); }

  Vector3d control_point(int i, int j) const;
  double weight(int i, int j) const;
  void translate_control_point(int i, int j, const Vector3d& d);

  /// Orientation flag: +1 keeps cross(S_u, S_v), -1 flips it.
  int normal_sign() const { return normal_sign_; }
  void set_normal_sign(int s) { normal_sign_ = s; }

  Vector3d eval(double u, double v) const;
  void eval_jet(double u, double v, Vector3d* s, Vector3d* su,
                Vector3d* sv) const;
  SurfaceFrame frame(double u, double v) const;

  NurbsPatch refined_dyadic(int times) const;
  /// Degree elevation to (pu, pv); requires Bezier form (no interior knots).
  NurbsPatch elevated(int pu, int pv) const;

  /// Weighted basis values of the rational basis R_ij restricted to the local
  /// (pu+1)x(pv+1) block of the span containing (u,v). Row-major over
  /// (local_i, local_j) with i fastest. Also reports the first global indices.
  void rational_basis(double u, double v, int* first_u, int* first_v,
                      double* values) const;

  const std::vector<double>& homogeneous() const { return net_; }
  std::uint64_t content_hash(std::uint64_t seed) const;

 private:
  KnotVector ku_, kv_;
  std::vector<double> net_;  // (i1 + n1*i2)*4, entries (wx, wy, wz, w)
  int normal_sign_ = 1;
};

/// One glued edge pair. Edges are numbered 0 south (v=0), 1 east (u=1),
/// 2 north (v=1), 3 west (u=0); the free coordinate parametrizes the edge in
/// increasing direction. `reversed` is true when the two parametrizations run
/// in opposite directions.
struct GlueEdge {
  int patch_a, edge_a;
  int patch_b, edge_b;
  bool reversed;
};

/// Collection of NURBS patches with edge-matching topology. Immutable after
/// construction; safe to share across threads.
class MultipatchSurface {
 public:
  MultipatchSurface() = default;
  explicit MultipatchSurface(std::vector<NurbsPatch> patches);

  int num_patches() const { return static_cast<int>(patches_.size()); }
  const NurbsPatch& patch(int i) const { return patches_[i]; }
  const std::vector<NurbsPatch>& patches() const { return patches_; }
  const std::vector<GlueEdge>& glue() const { return glue_; }

  /// Checks glue consistency (33 points per edge within tol), positive
  /// surface measure on a validation grid, and each edge glued at most once.
  void validate(double tol = 1e-12) const;

  void bounding_box(Vector3d* lo, Vector3d* hi) const;
  double area(int quad_order) const;
  std::uint64_t content_hash() const;

  MultipatchSurface with_patches(std::vector<NurbsPatch> patches) const;

 private:
  void build_topology();
  void orient_outward();

  std::vector<NurbsPatch> patches_;
  std::vector<GlueEdge> glue_;
};

MultipatchSurface make_cube();
MultipatchSurface make_cuboid_shell(const Vector3d& lo, const Vector3d& hi);
MultipatchSurface make_sphere();
/// names: cube | sphere | cuboid_shell (paper-scale interface box default)
MultipatchSurface builtin_geometry(const std::string& name);

/// Uniform dyadic element grid over all patches of a surface.
struct ElementMesh {
  struct Element {
    int patch;
    double u0, u1, v0, v1;
    std::array<Vector3d, 4> corner;  // (u0,v0), (u1,v0), (u1,v1), (u0,v1)
    Vector3d center;
    double diam;
  };
  int level = 0;
  const MultipatchSurface* surface = nullptr;
  std::vector<Element> elements;  // patch-major, v-major, u-minor
  double h = 0.0;                 // max element diameter

  static ElementMesh build(const MultipatchSurface& s, int level);
  ElementMesh refined() const { return build(*surface, level + 1); }
  int per_patch_per_dir() const { return 1 << level; }
};

// plain-text multipatch format, see README for the exact layout
MultipatchSurface read_multipatch(std::istream& in);
MultipatchSurface load_multipatch(const std::string& path);
void write_multipatch(const MultipatchSurface& s, std::ostream& out);
void save_multipatch(const MultipatchSurface& s, const std::string& path);

/// Legacy ASCII VTK polydata export; quad facets sampled per element, with
/// optional per-vertex scalar fields.
void export_vtk(const MultipatchSurface& s, int level, int samples_per_element,
                const std::string& path,
                const std::vector<std::pair<std::string, std::function<double(
                    const SurfaceFrame&)>>>& fields = {});

}  // namespace geo
}  // namespace scatuq

#endif  // SCATUQ_GEOMETRY_HPP_
