#include <Eigen/Eigenvalues>
#include <random>

#include "doctest.h"
#include "quadrature.hpp"
#include "random_field.hpp"

using namespace scatuq;
using namespace scatuq::rf;

namespace {

geo::MultipatchSurface flat_square() {
  geo::KnotVector kv = geo::KnotVector::open_uniform(1, 1);
  std::vector<Vector3d> cps{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  std::vector<geo::NurbsPatch> p{
      geo::NurbsPatch(kv, kv, cps, std::vector<double>(4, 1.0))};
  return geo::MultipatchSurface(std::move(p));
}

/// dense covariance Galerkin matrix over [space]^3, straightforward cell-pair
/// quadrature; independent of the pivoted path
MatrixXd dense_covariance(const MatrixKernel& kernel,
                          const geo::SplineSpace& space, int order) {
  const auto& g = quad::gauss01(order);
  int dim = space.dim();
  int pu = space.degree_u(), pv = space.degree_v();
  int nloc = (pu + 1) * (pv + 1);
  struct QP {
    Vector3d x;
    double w;
    std::vector<std::pair<int, double>> basis;  // (global dof, value)
  };
  std::vector<QP> pts;
  for (const auto& cell : space.cells()) {
    const geo::NurbsPatch& patch = space.is_rational()
                                       ? space.level_patch(cell.patch)
                                       : space.surface().patch(cell.patch);
    double du = cell.u1 - cell.u0, dv = cell.v1 - cell.v0;
    for (std::size_t a = 0; a < g.x.size(); ++a) {
      for (std::size_t b = 0; b < g.x.size(); ++b) {
        double u = cell.u0 + du * g.x[a], v = cell.v0 + dv * g.x[b];
        geo::SurfaceFrame f = patch.frame(u, v);
        QP qp;
        qp.x = f.point;
        qp.w = g.w[a] * g.w[b] * du * dv * f.measure;
        std::vector<double> vals(nloc);
        int fu, fv;
        space.basis(cell.patch, u, v, &fu, &fv, vals.data());
        for (int j = 0; j <= pv; ++j)
          for (int i = 0; i <= pu; ++i)
            qp.basis.push_back({space.global_index(cell.patch, fu + i, fv + j),
                                vals[j * (pu + 1) + i]});
        pts.push_back(std::move(qp));
      }
    }
  }
  MatrixXd c = MatrixXd::Zero(3 * dim, 3 * dim);
  for (const auto& p1 : pts) {
    for (const auto& p2 : pts) {
      Matrix3d k = kernel.eval(p1.x, p2.x) * p1.w * p2.w;
      for (const auto& [ga, va] : p1.basis)
        for (const auto& [gb, vb] : p2.basis)
          for (int c1 = 0; c1 < 3; ++c1)
            for (int c2 = 0; c2 < 3; ++c2)
              c(c1 * dim + ga, c2 * dim + gb) += va * vb * k(c1, c2);
    }
  }
  return c;
}

}  // namespace

TEST_CASE("gaussian kernel values and symmetry") {
  MatrixKernel k = gaussian_kernel(1.0 / 20.0, 4.0);
  Vector3d x(0.3, -0.2, 1.0);
  Matrix3d at_coincidence = k.eval(x, x);
  CHECK((at_coincidence - 0.05 * Matrix3d::Identity()).norm() <= 1e-15);
  // monotone decay toward zero
  double prev = k.eval(x, x + Vector3d(0.5, 0, 0))(0, 0);
  for (double d : {1.0, 2.0, 4.0, 8.0}) {
    double cur = k.eval(x, x + Vector3d(d, 0, 0))(0, 0);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev <= 1e-7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    Vector3d a(unif(rng), unif(rng), unif(rng));
    Vector3d b(unif(rng), unif(rng), unif(rng));
    CHECK((k.eval(a, b) - k.eval(b, a).transpose()).norm() <= 1e-15);
  }
  CHECK_THROWS_AS(gaussian_kernel(-1.0, 1.0), Error);
}

TEST_CASE("mass matrix of piecewise constants is the element areas") {
  geo::MultipatchSurface sq = flat_square();
  geo::SplineSpace space = geo::SplineSpace::discontinuous(sq, 0, 1);
  Eigen::SparseMatrix<double> m = assemble_mass(space, 2);
  REQUIRE(m.rows() == 4);
  MatrixXd dense(m);
  CHECK((dense - 0.25 * MatrixXd::Identity(4, 4)).norm() <= 1e-14);
}

TEST_CASE("mass matrix total equals the surface area") {
  geo::MultipatchSurface cube = geo::make_cube();
  geo::SplineSpace space = geo::SplineSpace::continuous(cube, 2, 1);
  Eigen::SparseMatrix<double> m = assemble_mass(space, 4);
  double total = MatrixXd(m).sum();
  CHECK(total == doctest::Approx(6.0).epsilon(1e-10));
}

TEST_CASE("pivoted cholesky factors a dense SPD matrix") {
  MatrixXd a(2, 2);
  a << 4.0, 2.0, 2.0, 3.0;
  auto diag = [&](double* d) {
    d[0] = a(0, 0);
    d[1] = a(1, 1);
  };
  auto col = [&](int j, double* c) {
    c[0] = a(0, j);
    c[1] = a(1, j);
  };
  LowRankFactor f = pivoted_cholesky_operator(2, diag, col, 1e-14);
  CHECK((f.l * f.l.transpose() - a).cwiseAbs().maxCoeff() <= 1e-14);
  // greedy residual is monotone nonincreasing by construction; re-run with a
  // larger matrix and check the pivot trace decay
  std::mt19937_64 rng(5);
  MatrixXd b = MatrixXd::Random(12, 12);
  MatrixXd spd = b * b.transpose() + 12.0 * MatrixXd::Identity(12, 12);
  auto diag2 = [&](double* d) {
    for (int i = 0; i < 12; ++i) d[i] = spd(i, i);
  };
  auto col2 = [&](int j, double* c) {
    for (int i = 0; i < 12; ++i) c[i] = spd(i, j);
  };
  LowRankFactor g = pivoted_cholesky_operator(12, diag2, col2, 1e-13);
  CHECK((g.l * g.l.transpose() - spd).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("pivoted cholesky terminates after one step on a rank-1 kernel") {
  geo::MultipatchSurface sq = flat_square();
  geo::SplineSpace space = geo::SplineSpace::continuous(sq, 1, 1);
  MatrixKernel k;
  k.name = "rank1";
  k.eval = [](const Vector3d& x, const Vector3d& y) {
    Vector3d gx(1.0 + x.x(), 0.5 * x.y(), 0.25);
    Vector3d gy(1.0 + y.x(), 0.5 * y.y(), 0.25);
    return Matrix3d(gx * gy.transpose());
  };
  LowRankFactor f = pivoted_cholesky(k, space, 1e-10, 3);
  CHECK(f.l.cols() == 1);
  CHECK(f.trace_error <= 1e-12 * f.initial_trace);
}

TEST_CASE("negative-definite kernel is rejected") {
  geo::MultipatchSurface sq = flat_square();
  geo::SplineSpace space = geo::SplineSpace::continuous(sq, 1, 0);
  MatrixKernel k;
  k.name = "negative";
  k.eval = [](const Vector3d&, const Vector3d&) {
    return Matrix3d(-Matrix3d::Identity());
  };
  CHECK_THROWS_AS(pivoted_cholesky(k, space, 1e-6, 3), Error);
}

TEST_CASE("reduced eigenproblem of the mass itself gives unit eigenvalues") {
  geo::MultipatchSurface cube = geo::make_cube();
  geo::SplineSpace space = geo::SplineSpace::continuous(cube, 1, 0);
  Eigen::SparseMatrix<double> m = assemble_mass(space, 3);
  int dim = space.dim();
  MatrixXd dense(m);
  Eigen::LLT<MatrixXd> llt(dense);
  MatrixXd l_scalar = llt.matrixL();
  LowRankFactor f;
  f.l = MatrixXd::Zero(3 * dim, 3 * dim);
  for (int c = 0; c < 3; ++c)
    f.l.block(c * dim, c * dim, dim, dim) = l_scalar;
  auto [lambda, modes] = reduced_eig(f, m);
  REQUIRE(static_cast<int>(lambda.size()) == 3 * dim);
  for (double lam : lambda) CHECK(lam == doctest::Approx(1.0).epsilon(1e-10));
  (void)modes;
}

TEST_CASE("reduced eigenpairs match a dense generalized solve") {
  geo::MultipatchSurface cube = geo::make_cube();
  geo::SplineSpace space = geo::SplineSpace::continuous(cube, 1, 0);
  int dim = space.dim();
  MatrixKernel kern = gaussian_kernel(0.1, 2.0);
  Eigen::SparseMatrix<double> mass = assemble_mass(space, 3);
  LowRankFactor f = pivoted_cholesky(kern, space, 1e-12, 3);
  auto [lambda, modes] = reduced_eig(f, mass);

  MatrixXd c = dense_covariance(kern, space, 3);
  MatrixXd mv = MatrixXd::Zero(3 * dim, 3 * dim);
  for (int comp = 0; comp < 3; ++comp)
    mv.block(comp * dim, comp * dim, dim, dim) = MatrixXd(mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> gen(c, mv);
  std::vector<double> reference;
  for (int i = 3 * dim - 1; i >= 0; --i) {
    double lam = gen.eigenvalues()(i);
    if (lam > 1e-10 * gen.eigenvalues().maxCoeff()) reference.push_back(lam);
  }
  REQUIRE(lambda.size() >= reference.size());
  for (std::size_t k = 0; k < reference.size(); ++k)
    CHECK(lambda[k] == doctest::Approx(reference[k]).epsilon(1e-8));

  // mode orthonormality in the vector mass inner product
  for (std::size_t a = 0; a < lambda.size(); ++a) {
    for (std::size_t b = a; b < lambda.size(); ++b) {
      double ip = modes.col(a).transpose() * mv * modes.col(b);
      CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) <= 1e-8);
    }
  }
}

TEST_CASE("truncation by captured trace fraction") {
  CHECK(truncate_count({4, 2, 1, 1}, 0.75) == 2);
  CHECK(truncate_count({4, 2, 1, 1}, 1.0) == 4);
  CHECK(truncate_count({4, 2, 1, 1}, 0.05) == 1);
  CHECK_THROWS_AS(truncate_count({1.0}, 0.0), Error);
}

TEST_CASE("kl expansion on the cube: spectrum and mercer mass") {
  geo::MultipatchSurface cube = geo::make_cube();
  KLBuildOptions opts;
  opts.degree = 2;
  opts.level = 1;
  opts.chol_tol = 1e-7;
  opts.trace_frac = 1.0;
  KLExpansion kl = build_kl(cube, gaussian_kernel(1.0 / 20.0, 4.0), opts);
  REQUIRE(kl.rank() > 3);
  for (int k = 1; k < kl.rank(); ++k)
    CHECK(kl.eigenvalues[k] <= kl.eigenvalues[k - 1] + 1e-15);
  // Mercer: sum of eigenvalues approximates int_S trace k(x,x) = 3/20 * 6
  double total = 0.0;
  for (double lam : kl.eigenvalues) total += lam;
  CHECK(total == doctest::Approx(0.9).epsilon(5e-3));
}

TEST_CASE("deformation is exact at y = 0 and affine in y") {
  geo::MultipatchSurface cube = geo::make_cube();
  KLBuildOptions opts;
  opts.degree = 2;
  opts.level = 0;
  opts.chol_tol = 1e-6;
  opts.trace_frac = 0.95;
  opts.max_modes = 6;
  KLExpansion kl = build_kl(cube, gaussian_kernel(1.0 / 20.0, 4.0), opts);
  int m = kl.rank();
  REQUIRE(m >= 2);

  std::vector<double> zero(m, 0.0);
  geo::MultipatchSurface same = deform_surface(kl, zero);
  for (int p = 0; p < 6; ++p)
    for (double u : {0.0, 0.3, 0.9})
      for (double v : {0.1, 0.5, 1.0})
        CHECK((same.patch(p).eval(u, v) - cube.patch(p).eval(u, v)).norm() <=
              1e-14);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> y1(m), y2(m), ymix(m);
  for (int k = 0; k < m; ++k) {
    y1[k] = unif(rng);
    y2[k] = unif(rng);
    ymix[k] = 0.25 * y1[k] + 0.75 * y2[k];
  }
  geo::MultipatchSurface d1 = deform_surface(kl, y1);
  geo::MultipatchSurface d2 = deform_surface(kl, y2);
  geo::MultipatchSurface dm = deform_surface(kl, ymix);
  for (int p = 0; p < 6; ++p) {
    for (int j = 0; j < d1.patch(p).num_v(); ++j) {
      for (int i = 0; i < d1.patch(p).num_u(); ++i) {
        Vector3d mix = 0.25 * d1.patch(p).control_point(i, j) +
                       0.75 * d2.patch(p).control_point(i, j);
        CHECK((dm.patch(p).control_point(i, j) - mix).norm() <= 1e-13);
      }
    }
  }
}

TEST_CASE("unit parameter reproduces the first scaled mode") {
  geo::MultipatchSurface cube = geo::make_cube();
  KLBuildOptions opts;
  opts.degree = 2;
  opts.level = 1;
  opts.max_modes = 4;
  opts.trace_frac = 1.0;
  KLExpansion kl = build_kl(cube, gaussian_kernel(1.0 / 20.0, 4.0), opts);
  std::vector<double> e1(kl.rank(), 0.0);
  e1[0] = 1.0;
  geo::MultipatchSurface def = deform_surface(kl, e1);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double sq = std::sqrt(kl.eigenvalues[0]);
  for (int t = 0; t < 50; ++t) {
    int p = static_cast<int>(unif(rng) * 6);
    double u = unif(rng), v = unif(rng);
    Vector3d disp = def.patch(p).eval(u, v) - cube.patch(p).eval(u, v);
    CHECK((disp - sq * kl.mode_value(0, p, u, v)).norm() <= 1e-12);
    CHECK((disp - kl.displacement(p, u, v, e1)).norm() <= 1e-12);
  }
}

TEST_CASE("degenerate deformation is rejected") {
  geo::MultipatchSurface cube = geo::make_cube();
  KLBuildOptions opts;
  opts.degree = 2;
  opts.level = 0;
  opts.max_modes = 2;
  KLExpansion kl = build_kl(cube, gaussian_kernel(1.0 / 20.0, 4.0), opts);
  // mean deformation moving every control point to the origin
  int dim = kl.space.dim();
  for (int p = 0; p < 6; ++p) {
    const geo::NurbsPatch& patch = kl.space.level_patch(p);
    for (int j = 0; j < patch.num_v(); ++j) {
      for (int i = 0; i < patch.num_u(); ++i) {
        int g = kl.space.global_index(p, i, j);
        Vector3d c = patch.control_point(i, j);
        for (int comp = 0; comp < 3; ++comp)
          kl.mean(comp * dim + g) = -c[comp];
      }
    }
  }
  std::vector<double> zero(kl.rank(), 0.0);
  bool rejected = false;
  try {
    deform_surface(kl, zero);
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::sample_rejected;
  }
  CHECK(rejected);
}
