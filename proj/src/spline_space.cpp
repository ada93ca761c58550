#include "spline_space.hpp"

#include <numeric>

namespace scatuq {
namespace geo {

namespace {

// union-find with path compression
int uf_find(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

void uf_union(std::vector<int>& parent, int a, int b) {
  a = uf_find(parent, a);
  b = uf_find(parent, b);
  if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

}  // namespace

SplineSpace SplineSpace::discontinuous(const MultipatchSurface& s, int degree,
                                       int level) {
  require(degree >= 0 && level >= 0, ErrorCode::invalid_argument,
          "SplineSpace: bad degree/level");
  SplineSpace sp;
  sp.surface_ = &s;
  sp.pu_ = sp.pv_ = degree;
  sp.level_ = level;
  sp.continuous_ = false;
  sp.rational_ = false;
  KnotVector kv = KnotVector::open_uniform(degree, 1 << level);
  int per_patch = kv.num_basis() * kv.num_basis();
  for (int p = 0; p < s.num_patches(); ++p) {
    sp.offsets_.push_back(p * per_patch);
    sp.knots_u_.push_back(kv);
    sp.knots_v_.push_back(kv);
  }
  sp.local_dim_ = s.num_patches() * per_patch;
  sp.dim_ = sp.local_dim_;
  sp.local_to_global_.resize(sp.local_dim_);
  std::iota(sp.local_to_global_.begin(), sp.local_to_global_.end(), 0);
  sp.build_cells();
  return sp;
}

SplineSpace SplineSpace::continuous(const MultipatchSurface& s, int degree,
                                    int level) {
  require(degree >= 1 && level >= 0, ErrorCode::invalid_argument,
          "SplineSpace: bad degree/level");
  SplineSpace sp;
  sp.surface_ = &s;
  sp.level_ = level;
  sp.continuous_ = true;
  sp.rational_ = true;
  int pu = degree, pv = degree;
  for (int p = 0; p < s.num_patches(); ++p) {
    pu = std::max(pu, s.patch(p).degree_u());
    pv = std::max(pv, s.patch(p).degree_v());
  }
  sp.pu_ = pu;
  sp.pv_ = pv;
  sp.offsets_.resize(s.num_patches());
  int offset = 0;
  for (int p = 0; p < s.num_patches(); ++p) {
    NurbsPatch prepared = s.patch(p).elevated(pu, pv).refined_dyadic(level);
    sp.offsets_[p] = offset;
    offset += prepared.num_u() * prepared.num_v();
    sp.knots_u_.push_back(prepared.knots_u());
    sp.knots_v_.push_back(prepared.knots_v());
    sp.level_patches_.push_back(std::move(prepared));
  }
  sp.local_dim_ = offset;

  // identify edge coefficients across glued patches
  std::vector<int> parent(sp.local_dim_);
  std::iota(parent.begin(), parent.end(), 0);
  auto edge_dofs = [&](int p, int edge) {
    int nu = sp.patch_nu(p), nv = sp.patch_nv(p);
    std::vector<int> dofs;
    int n = (edge == 0 || edge == 2) ? nu : nv;
    for (int t = 0; t < n; ++t) {
      int i = 0, j = 0;
      switch (edge) {
        case 0: i = t; j = 0; break;
        case 1: i = nu - 1; j = t; break;
        case 2: i = t; j = nv - 1; break;
        default: i = 0; j = t; break;
      }
      dofs.push_back(sp.offsets_[p] + j * nu + i);
    }
    return dofs;
  };
  for (const auto& g : s.glue()) {
    auto da = edge_dofs(g.patch_a, g.edge_a);
    auto db = edge_dofs(g.patch_b, g.edge_b);
    require(da.size() == db.size(), ErrorCode::invalid_argument,
            "continuous space: glued edges carry different dof counts");
    int n = static_cast<int>(da.size());
    for (int t = 0; t < n; ++t)
      uf_union(parent, da[t], db[g.reversed ? n - 1 - t : t]);
  }
  sp.local_to_global_.assign(sp.local_dim_, -1);
  int next = 0;
  for (int i = 0; i < sp.local_dim_; ++i) {
    int r = uf_find(parent, i);
    if (sp.local_to_global_[r] < 0) sp.local_to_global_[r] = next++;
    sp.local_to_global_[i] = sp.local_to_global_[r];
  }
  sp.dim_ = next;
  sp.build_cells();
  return sp;
}

int SplineSpace::patch_nu(int p) const { return knots_u_[p].num_basis(); }
int SplineSpace::patch_nv(int p) const { return knots_v_[p].num_basis(); }

const KnotVector& SplineSpace::knots_u(int p) const { return knots_u_[p]; }
const KnotVector& SplineSpace::knots_v(int p) const { return knots_v_[p]; }

const NurbsPatch& SplineSpace::level_patch(int p) const {
  require(!level_patches_.empty(), ErrorCode::invalid_argument,
          "level_patch: only available for continuous spaces");
  return level_patches_[p];
}

void SplineSpace::basis(int p, double u, double v, int* first_u, int* first_v,
                        double* values) const {
  if (rational_) {
    level_patches_[p].rational_basis(u, v, first_u, first_v, values);
    return;
  }
  const KnotVector& ku = knots_u_[p];
  const KnotVector& kv = knots_v_[p];
  int su = ku.find_span(u), sv = kv.find_span(v);
  double bu[32], bv[32];
  ku.basis_funs(su, u, bu);
  kv.basis_funs(sv, v, bv);
  *first_u = su - pu_;
  *first_v = sv - pv_;
  for (int j = 0; j <= pv_; ++j)
    for (int i = 0; i <= pu_; ++i) values[j * (pu_ + 1) + i] = bu[i] * bv[j];
}

void SplineSpace::build_cells() {
  cells_.clear();
  for (int p = 0; p < static_cast<int>(knots_u_.size()); ++p) {
    const auto& ku = knots_u_[p].knots();
    const auto& kv = knots_v_[p].knots();
    for (std::size_t j = 0; j + 1 < kv.size(); ++j) {
      if (kv[j + 1] <= kv[j]) continue;
      for (std::size_t i = 0; i + 1 < ku.size(); ++i) {
        if (ku[i + 1] <= ku[i]) continue;
        cells_.push_back({p, ku[i], ku[i + 1], kv[j], kv[j + 1]});
      }
    }
  }
}

Eigen::SparseMatrix<double> SplineSpace::local_to_global_matrix() const {
  Eigen::SparseMatrix<double> t(dim_, local_dim_);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(local_dim_);
  for (int i = 0; i < local_dim_; ++i)
    trips.emplace_back(local_to_global_[i], i, 1.0);
  t.setFromTriplets(trips.begin(), trips.end());
  return t;
}

}  // namespace geo
}  // namespace scatuq
