#include "random_field.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "quadrature.hpp"

namespace scatuq {
namespace rf {

MatrixKernel gaussian_kernel(double amplitude, double length) {
  require(amplitude > 0.0 && length > 0.0, ErrorCode::invalid_argument,
          "gaussian_kernel: amplitude and length must be positive");
  MatrixKernel k;
  k.name = "gaussian";
  k.amplitude = amplitude;
  k.length = length;
  k.eval = [amplitude, length](const Vector3d& x, const Vector3d& y) {
    return Matrix3d(amplitude * std::exp(-(x - y).squaredNorm() / length) *
                    Matrix3d::Identity());
  };
  return k;
}

namespace {

/// Quadrature point table over the cells of a scalar spline space: positions,
/// combined weights (gauss x parameter area x surface measure), and the local
/// basis values per cell.
struct SpaceQuadrature {
  std::vector<Vector3d> points;
  std::vector<double> weights;
  // per cell: first point index, local dof ids, basis values (dof-major)
  struct CellData {
    int first_point;
    int npoints;
    std::vector<int> local_dofs;
    std::vector<double> basis;  // local_dofs.size() x npoints
  };
  std::vector<CellData> cells;
  // per local dof: (point index, basis value) pairs
  std::vector<std::vector<std::pair<int, double>>> support;
};

SpaceQuadrature tabulate(const geo::SplineSpace& space, int quad_order) {
  const auto& gauss = quad::gauss01(quad_order);
  const auto& surface = space.surface();
  SpaceQuadrature tab;
  int pu = space.degree_u(), pv = space.degree_v();
  int nloc = (pu + 1) * (pv + 1);
  tab.support.resize(space.local_dim());
  std::vector<double> vals(nloc);
  for (const auto& cell : space.cells()) {
    SpaceQuadrature::CellData cd;
    cd.first_point = static_cast<int>(tab.points.size());
    cd.npoints = quad_order * quad_order;
    double du = cell.u1 - cell.u0, dv = cell.v1 - cell.v0;
    const geo::NurbsPatch& patch = space.is_rational()
                                       ? space.level_patch(cell.patch)
                                       : surface.patch(cell.patch);
    bool ids_set = false;
    cd.basis.assign(static_cast<std::size_t>(nloc) * cd.npoints, 0.0);
    for (int b = 0; b < quad_order; ++b) {
      for (int a = 0; a < quad_order; ++a) {
        double u = cell.u0 + du * gauss.x[a];
        double v = cell.v0 + dv * gauss.x[b];
        geo::SurfaceFrame f = patch.frame(u, v);
        int q = static_cast<int>(tab.points.size());
        tab.points.push_back(f.point);
        tab.weights.push_back(gauss.w[a] * gauss.w[b] * du * dv * f.measure);
        int fu, fv;
        space.basis(cell.patch, u, v, &fu, &fv, vals.data());
        if (!ids_set) {
          for (int j = 0; j <= pv; ++j)
            for (int i = 0; i <= pu; ++i)
              cd.local_dofs.push_back(space.local_offset(cell.patch) +
                                      (fv + j) * space.patch_nu(cell.patch) +
                                      (fu + i));
          ids_set = true;
        }
        int qi = q - cd.first_point;
        for (int l = 0; l < nloc; ++l) {
          cd.basis[static_cast<std::size_t>(l) * cd.npoints + qi] = vals[l];
          if (vals[l] != 0.0) tab.support[cd.local_dofs[l]].push_back({q, vals[l]});
        }
      }
    }
    tab.cells.push_back(std::move(cd));
  }
  return tab;
}

}  // namespace

Eigen::SparseMatrix<double> assemble_mass(const geo::SplineSpace& space,
                                          int quad_order, int threads) {
  require(quad_order >= space.degree_u() + 1, ErrorCode::invalid_argument,
          "assemble_mass: quadrature order below degree + 1");
  (void)threads;
  SpaceQuadrature tab = tabulate(space, quad_order);
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& cell : tab.cells) {
    int nloc = static_cast<int>(cell.local_dofs.size());
    for (int a = 0; a < nloc; ++a) {
      int ga = space.global_index_of_local(cell.local_dofs[a]);
      for (int b = 0; b < nloc; ++b) {
        int gb = space.global_index_of_local(cell.local_dofs[b]);
        double acc = 0.0;
        for (int q = 0; q < cell.npoints; ++q)
          acc += cell.basis[static_cast<std::size_t>(a) * cell.npoints + q] *
                 cell.basis[static_cast<std::size_t>(b) * cell.npoints + q] *
                 tab.weights[cell.first_point + q];
        trips.emplace_back(ga, gb, acc);
      }
    }
  }
  Eigen::SparseMatrix<double> m(space.dim(), space.dim());
  m.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(m);
  require(llt.info() == Eigen::Success, ErrorCode::numerics,
          "assemble_mass: mass matrix is not SPD (degenerate patch?)");
  return m;
}

LowRankFactor pivoted_cholesky_operator(
    int n, const std::function<void(double*)>& diagonal,
    const std::function<void(int, double*)>& column, double tol,
    int max_rank) {
  require(tol > 0.0 && tol < 1.0, ErrorCode::invalid_argument,
          "pivoted_cholesky: tol must lie in (0,1)");
  LowRankFactor out;
  std::vector<double> d(n);
  diagonal(d.data());
  double trace = std::accumulate(d.begin(), d.end(), 0.0);
  out.initial_trace = trace;
  require(trace > 0.0, ErrorCode::numerics, "pivoted_cholesky: zero trace");
  int limit = max_rank < 0 ? n : std::min(n, max_rank);
  std::vector<std::vector<double>> cols;
  std::vector<double> err_trace(1, trace);
  double err = trace;
  std::vector<double> c(n);
  while (static_cast<int>(cols.size()) < limit && err > tol * trace) {
    int piv = static_cast<int>(
        std::max_element(d.begin(), d.end()) - d.begin());
    require(d[piv] > -1e-12 * trace, ErrorCode::numerics,
            "pivoted_cholesky: negative pivot, kernel not positive type");
    if (d[piv] <= 0.0) break;
    column(piv, c.data());
    for (const auto& prev : cols)
      for (int i = 0; i < n; ++i) c[i] -= prev[i] * prev[piv];
    double scale = 1.0 / std::sqrt(d[piv]);
    for (int i = 0; i < n; ++i) c[i] *= scale;
    for (int i = 0; i < n; ++i) d[i] -= c[i] * c[i];
    d[piv] = 0.0;
    err = 0.0;
    for (int i = 0; i < n; ++i) err += std::max(d[i], 0.0);
    out.pivots.push_back(piv);
    cols.push_back(c);
  }
  out.trace_error = err;
  out.l.resize(n, static_cast<int>(cols.size()));
  for (int j = 0; j < out.l.cols(); ++j)
    for (int i = 0; i < n; ++i) out.l(i, j) = cols[j][i];
  return out;
}

LowRankFactor pivoted_cholesky(const MatrixKernel& kernel,
                               const geo::SplineSpace& space, double tol,
                               int quad_order, int threads, int max_rank) {
  if (quad_order <= 0) quad_order = space.degree_u() + 2;
  SpaceQuadrature tab = tabulate(space, quad_order);
  const int nl = space.local_dim();
  const int n_star = 3 * nl;
  const int nq = static_cast<int>(tab.points.size());

  auto diagonal = [&](double* d) {
    parallel_for(nl, threads, [&](std::size_t l) {
      const auto& supp = tab.support[l];
      Vector3d acc = Vector3d::Zero();
      for (const auto& [q1, v1] : supp) {
        for (const auto& [q2, v2] : supp) {
          Matrix3d k = kernel.eval(tab.points[q1], tab.points[q2]);
          acc += v1 * tab.weights[q1] * v2 * tab.weights[q2] * k.diagonal();
        }
      }
      for (int c = 0; c < 3; ++c) d[c * nl + l] = acc[c];
    });
  };
  auto column = [&](int dof, double* out) {
    int c_col = dof / nl;
    int l_col = dof % nl;
    const auto& supp = tab.support[l_col];
    // kernel-weighted source field at every quadrature point
    std::vector<Vector3d> field(nq);
    parallel_for(nq, threads, [&](std::size_t q) {
      Vector3d acc = Vector3d::Zero();
      for (const auto& [qs, vs] : supp)
        acc += kernel.eval(tab.points[q], tab.points[qs]).col(c_col) * vs *
               tab.weights[qs];
      field[q] = acc;
    });
    for (int l = 0; l < nl; ++l) {
      Vector3d acc = Vector3d::Zero();
      for (const auto& [q, v] : tab.support[l])
        acc += v * tab.weights[q] * field[q];
      for (int c = 0; c < 3; ++c) out[c * nl + l] = acc[c];
    }
  };

  LowRankFactor star =
      pivoted_cholesky_operator(n_star, diagonal, column, tol, max_rank);

  // map to the continuous space: L = (I3 (x) T) L_star
  LowRankFactor out;
  out.trace_error = star.trace_error;
  out.initial_trace = star.initial_trace;
  out.pivots = star.pivots;
  int dim = space.dim();
  out.l = MatrixXd::Zero(3 * dim, star.l.cols());
  for (int c = 0; c < 3; ++c)
    for (int l = 0; l < nl; ++l)
      out.l.row(c * dim + space.global_index_of_local(l)) +=
          star.l.row(c * nl + l);
  return out;
}

std::pair<std::vector<double>, MatrixXd> reduced_eig(
    const LowRankFactor& lr, const Eigen::SparseMatrix<double>& scalar_mass) {
  int dim = scalar_mass.rows();
  int m = static_cast<int>(lr.l.cols());
  require(lr.l.rows() == 3 * dim, ErrorCode::invalid_argument,
          "reduced_eig: factor does not match the mass matrix");
  if (m == 0) return {{}, MatrixXd::Zero(3 * dim, 0)};
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(scalar_mass);
  require(llt.info() == Eigen::Success, ErrorCode::numerics,
          "reduced_eig: mass not SPD");
  MatrixXd x(3 * dim, m);
  for (int c = 0; c < 3; ++c)
    x.middleRows(c * dim, dim) = llt.solve(lr.l.middleRows(c * dim, dim));
  MatrixXd b = lr.l.transpose() * x;
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(b);
  require(eig.info() == Eigen::Success, ErrorCode::numerics,
          "reduced_eig: eigensolver failed");
  double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  std::vector<double> lambda;
  std::vector<int> keep;
  for (int k = m - 1; k >= 0; --k) {  // descending
    double lam = eig.eigenvalues()(k);
    if (lam <= 1e-12 * lmax || lam <= 0.0) continue;
    lambda.push_back(lam);
    keep.push_back(k);
  }
  MatrixXd modes(3 * dim, static_cast<int>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    modes.col(j) =
        x * eig.eigenvectors().col(keep[j]) / std::sqrt(lambda[j]);
  return {lambda, modes};
}

int truncate_count(const std::vector<double>& lambda, double trace_frac) {
  require(trace_frac > 0.0 && trace_frac <= 1.0, ErrorCode::invalid_argument,
          "truncate: trace_frac must lie in (0,1]");
  double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    acc += lambda[k];
    if (acc >= trace_frac * total) return static_cast<int>(k) + 1;
  }
  return static_cast<int>(lambda.size());
}

Vector3d KLExpansion::mode_value(int k, int patch, double u, double v) const {
  int pu = space.degree_u(), pv = space.degree_v();
  double vals[1024];
  int fu, fv;
  space.basis(patch, u, v, &fu, &fv, vals);
  int dim = space.dim();
  Vector3d out = Vector3d::Zero();
  for (int j = 0; j <= pv; ++j) {
    for (int i = 0; i <= pu; ++i) {
      int g = space.global_index(patch, fu + i, fv + j);
      double b = vals[j * (pu + 1) + i];
      for (int c = 0; c < 3; ++c) out[c] += b * modes(c * dim + g, k);
    }
  }
  return out;
}

Vector3d KLExpansion::displacement(int patch, double u, double v,
                                   const std::vector<double>& y) const {
  require(static_cast<int>(y.size()) == rank(), ErrorCode::invalid_argument,
          "displacement: parameter dimension mismatch");
  int pu = space.degree_u(), pv = space.degree_v();
  double vals[1024];
  int fu, fv;
  space.basis(patch, u, v, &fu, &fv, vals);
  int dim = space.dim();
  Vector3d out = Vector3d::Zero();
  for (int j = 0; j <= pv; ++j) {
    for (int i = 0; i <= pu; ++i) {
      int g = space.global_index(patch, fu + i, fv + j);
      double b = vals[j * (pu + 1) + i];
      for (int c = 0; c < 3; ++c) {
        double coeff = mean.size() > 0 ? mean(c * dim + g) : 0.0;
        for (int k = 0; k < rank(); ++k)
          coeff += std::sqrt(eigenvalues[k]) * y[k] * modes(c * dim + g, k);
        out[c] += b * coeff;
      }
    }
  }
  return out;
}

KLExpansion build_kl(const geo::MultipatchSurface& surface,
                     const MatrixKernel& kernel, const KLBuildOptions& opts) {
  KLExpansion kl;
  kl.surface = &surface;
  kl.space = geo::SplineSpace::continuous(surface, opts.degree, opts.level);
  int quad_order =
      opts.quad_order > 0 ? opts.quad_order : kl.space.degree_u() + 2;
  Eigen::SparseMatrix<double> mass =
      assemble_mass(kl.space, kl.space.degree_u() + 2, opts.threads);
  LowRankFactor lr = pivoted_cholesky(kernel, kl.space, opts.chol_tol,
                                      quad_order, opts.threads);
  auto [lambda, modes] = reduced_eig(lr, mass);
  int keep = truncate_count(lambda, opts.trace_frac);
  if (opts.max_modes > 0) keep = std::min(keep, opts.max_modes);
  kl.eigenvalues.assign(lambda.begin(), lambda.begin() + keep);
  kl.modes = modes.leftCols(keep);
  kl.mean = VectorXd::Zero(3 * kl.space.dim());
  return kl;
}

geo::MultipatchSurface deform_surface(const KLExpansion& kl,
                                      const std::vector<double>& y) {
  require(static_cast<int>(y.size()) == kl.rank(), ErrorCode::invalid_argument,
          "deform_surface: parameter dimension must equal the KL rank");
  const geo::SplineSpace& space = kl.space;
  int dim = space.dim();
  // displacement coefficients in the continuous space
  VectorXd coeff = kl.mean;
  for (int k = 0; k < kl.rank(); ++k)
    coeff += std::sqrt(kl.eigenvalues[k]) * y[k] * kl.modes.col(k);
  std::vector<geo::NurbsPatch> patches;
  for (int p = 0; p < kl.surface->num_patches(); ++p) {
    geo::NurbsPatch patch = space.level_patch(p);
    int nu = space.patch_nu(p);
    for (int j = 0; j < space.patch_nv(p); ++j) {
      for (int i = 0; i < nu; ++i) {
        int g = space.global_index(p, i, j);
        patch.translate_control_point(
            i, j, Vector3d(coeff(g), coeff(dim + g), coeff(2 * dim + g)));
      }
    }
    patches.push_back(std::move(patch));
  }
  try {
    geo::MultipatchSurface deformed(std::move(patches));
    deformed.validate();
    return deformed;
  } catch (const Error& e) {
    fail(ErrorCode::sample_rejected,
         std::string("sample rejected: deformed surface is invalid: ") +
             e.what());
  }
}

}  // namespace rf
}  // namespace scatuq
