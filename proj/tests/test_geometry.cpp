#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "geometry.hpp"
#include "oracles.hpp"
#include "spline_space.hpp"

using namespace scatuq;
using namespace scatuq::geo;
using splines::KnotVector;

namespace {

NurbsPatch flat_square_patch() {
  KnotVector kv = KnotVector::open_uniform(1, 1);
  std::vector<Vector3d> cps{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  return NurbsPatch(kv, kv, cps, std::vector<double>(4, 1.0));
}

}  // namespace

TEST_CASE("bilinear patch reproduces the unit square") {
  NurbsPatch p = flat_square_patch();
  Vector3d mid = p.eval(0.5, 0.5);
  CHECK(mid.x() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mid.y() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mid.z() == doctest::Approx(0.0));
}

TEST_CASE("quarter annulus matches a direct rational evaluator") {
  // angular direction u (rational quadratic 90-degree arc), radial v
  const double w1 = 1.0 / std::sqrt(2.0);
  const double r0 = 1.0, r1 = 2.0;
  KnotVector ku = KnotVector::open_uniform(2, 1);
  KnotVector kv = KnotVector::open_uniform(1, 1);
  std::vector<Vector3d> cps;
  std::vector<double> w;
  for (double r : {r0, r1}) {
    cps.push_back({r, 0, 0});
    cps.push_back({r, r, 0});
    cps.push_back({0, r, 0});
    w.insert(w.end(), {1.0, w1, 1.0});
  }
  NurbsPatch patch(ku, kv, cps, w);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    double u = unif(rng), v = unif(rng);
    Vector3d mine = patch.eval(u, v);
    Vector3d ref = oracles::naive_nurbs_eval(ku.knots(), kv.knots(), 2, 1, cps,
                                             w, u, v);
    CHECK((mine - ref).norm() <= 1e-12);
    // points lie at radius r(v) from the axis
    double r = r0 + (r1 - r0) * v;
    CHECK(mine.head<2>().norm() == doctest::Approx(r).epsilon(1e-13));
  }
  Vector3d at_half = patch.eval(0.5, 0.3);
  CHECK(at_half.head<2>().norm() == doctest::Approx(1.3).epsilon(1e-13));
}

TEST_CASE("surface frame of a flat patch") {
  NurbsPatch p = flat_square_patch();
  SurfaceFrame f = p.frame(0.3, 0.8);
  CHECK((f.normal - Vector3d(0, 0, 1)).norm() <= 1e-15);
  CHECK(f.measure == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("frame measure scales with the parametrization") {
  KnotVector kv = KnotVector::open_uniform(1, 1);
  std::vector<Vector3d> cps{{0, 0, 0}, {2, 0, 0}, {0, 2, 0}, {2, 2, 0}};
  NurbsPatch p(kv, kv, cps, std::vector<double>(4, 1.0));
  SurfaceFrame f = p.frame(0.5, 0.5);
  CHECK(f.measure == doctest::Approx(4.0).epsilon(1e-14));
  CHECK((f.normal - Vector3d(0, 0, 1)).norm() <= 1e-15);
}

TEST_CASE("degenerate parametrization raises") {
  KnotVector kv = KnotVector::open_uniform(1, 1);
  std::vector<Vector3d> cps(4, Vector3d(1, 2, 3));
  NurbsPatch p(kv, kv, cps, std::vector<double>(4, 1.0));
  CHECK_THROWS_AS(p.frame(0.5, 0.5), Error);
}

TEST_CASE("cube topology, orientation, and area") {
  MultipatchSurface cube = make_cube();
  CHECK(cube.num_patches() == 6);
  CHECK(cube.glue().size() == 12);
  cube.validate();
  CHECK(cube.area(5) == doctest::Approx(6.0).epsilon(1e-10));
  // all normals point away from the center
  Vector3d c(0.5, 0.5, 0.5);
  for (int p = 0; p < 6; ++p) {
    SurfaceFrame f = cube.patch(p).frame(0.5, 0.5);
    CHECK(f.normal.dot(f.point - c) > 0.0);
  }
}

TEST_CASE("cuboid shell matches the requested box") {
  Vector3d lo(-1.5, -0.5, -0.5), hi(3.5, 2.5, 1.5);
  MultipatchSurface shell = make_cuboid_shell(lo, hi);
  shell.validate();
  Vector3d blo, bhi;
  shell.bounding_box(&blo, &bhi);
  CHECK((blo - lo).norm() <= 1e-14);
  CHECK((bhi - hi).norm() <= 1e-14);
  MultipatchSurface builtin = builtin_geometry("cuboid_shell");
  builtin.bounding_box(&blo, &bhi);
  CHECK((blo - lo).norm() <= 1e-14);
  CHECK((bhi - hi).norm() <= 1e-14);
}

TEST_CASE("sphere is exact, glued, and outward oriented") {
  MultipatchSurface sphere = make_sphere();
  CHECK(sphere.num_patches() == 6);
  CHECK(sphere.glue().size() == 12);
  sphere.validate();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    int p = static_cast<int>(unif(rng) * 6);
    double u = unif(rng), v = unif(rng);
    Vector3d x = sphere.patch(p).eval(u, v);
    CHECK(std::abs(x.norm() - 1.0) <= 1e-13);
    SurfaceFrame f = sphere.patch(p).frame(u, v);
    CHECK(f.normal.dot(f.point) > 0.9);
  }
  CHECK(sphere.area(12) == doctest::Approx(4.0 * kPi).epsilon(1e-9));
}

TEST_CASE("unknown builtin raises") {
  CHECK_THROWS_AS(builtin_geometry("dodecahedron"), Error);
}

TEST_CASE("element mesh refinement") {
  MultipatchSurface cube = make_cube();
  ElementMesh m0 = ElementMesh::build(cube, 0);
  CHECK(m0.elements.size() == 6);
  ElementMesh m1 = m0.refined();
  CHECK(m1.elements.size() == 24);
  ElementMesh m2 = m1.refined();
  CHECK(m2.elements.size() == 16 * m0.elements.size());
  CHECK(m1.h == doctest::Approx(0.5 * m0.h).epsilon(1e-12));
}

TEST_CASE("discontinuous space dimensions follow the counting oracle") {
  MultipatchSurface cube = make_cube();
  for (int level = 0; level <= 3; ++level) {
    SplineSpace space = SplineSpace::discontinuous(cube, 2, level);
    int per_dir = (1 << level) + 2;
    CHECK(space.dim() == 6 * per_dir * per_dir);
  }
}

TEST_CASE("continuous space identifies shared edges and corners") {
  MultipatchSurface cube = make_cube();
  // degree 1, level 0: only the eight cube corners remain
  CHECK(SplineSpace::continuous(cube, 1, 0).dim() == 8);
  // degree 2, level 0: 6 face + 12 edge + 8 corner coefficients
  CHECK(SplineSpace::continuous(cube, 2, 0).dim() == 26);
  // degree 2, level 1: 6*4 + 12*2 + 8
  CHECK(SplineSpace::continuous(cube, 2, 1).dim() == 56);
}

TEST_CASE("continuous rational space is continuous across glued edges") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const auto& surface : {make_cube(), make_sphere()}) {
    SplineSpace space = SplineSpace::continuous(surface, 2, 1);
    std::vector<double> coeff(space.dim());
    for (double& c : coeff) c = unif(rng);
    auto eval = [&](int p, double u, double v) {
      int pu = space.degree_u(), pv = space.degree_v();
      std::vector<double> vals((pu + 1) * (pv + 1));
      int fu, fv;
      space.basis(p, u, v, &fu, &fv, vals.data());
      double acc = 0.0;
      for (int j = 0; j <= pv; ++j)
        for (int i = 0; i <= pu; ++i)
          acc += vals[j * (pu + 1) + i] *
                 coeff[space.global_index(p, fu + i, fv + j)];
      return acc;
    };
    auto edge_uv = [](int edge, double t) -> std::pair<double, double> {
      switch (edge) {
        case 0: return {t, 0.0};
        case 1: return {1.0, t};
        case 2: return {t, 1.0};
        default: return {0.0, t};
      }
    };
    for (const auto& g : surface.glue()) {
      for (double t : {0.0, 0.21, 0.5, 0.83, 1.0}) {
        auto [ua, va] = edge_uv(g.edge_a, t);
        auto [ub, vb] = edge_uv(g.edge_b, g.reversed ? 1.0 - t : t);
        CHECK(eval(g.patch_a, ua, va) ==
              doctest::Approx(eval(g.patch_b, ub, vb)).epsilon(1e-11));
      }
    }
    // rational basis forms a partition of unity for unit coefficients
    std::vector<double> ones(space.dim(), 1.0);
    std::swap(coeff, ones);
    CHECK(eval(0, 0.37, 0.81) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("multipatch text format round trip") {
  for (const auto& surface : {make_cube(), make_sphere()}) {
    std::stringstream buffer;
    write_multipatch(surface, buffer);
    MultipatchSurface restored = read_multipatch(buffer);
    REQUIRE(restored.num_patches() == surface.num_patches());
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 25; ++t) {
      int p = static_cast<int>(unif(rng) * surface.num_patches());
      double u = unif(rng), v = unif(rng);
      CHECK((surface.patch(p).eval(u, v) - restored.patch(p).eval(u, v))
                .norm() <= 1e-12);
    }
    restored.validate();
  }
}

TEST_CASE("vtk export writes a legacy polydata file") {
  MultipatchSurface cube = make_cube();
  std::string path = "/tmp/scatuq_test_cube.vtk";
  export_vtk(cube, 1, 2, path,
             {{"height", [](const SurfaceFrame& f) { return f.point.z(); }}});
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# vtk DataFile Version 3.0");
}
