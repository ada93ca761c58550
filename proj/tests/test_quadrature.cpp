#include <cmath>
#include <set>

#include "doctest.h"
#include "quadrature.hpp"

using namespace scatuq::quad;

TEST_CASE("halton radical inverse values") {
  CHECK(radical_inverse(1, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(radical_inverse(2, 2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(radical_inverse(3, 2) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(radical_inverse(1, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("halton rule nodes and weights") {
  QuadratureRule rule = halton_rule(1, 2);
  REQUIRE(rule.size() == 1);
  CHECK(rule.nodes[0][0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rule.nodes[0][1] == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));

  rule = halton_rule(1000, 5);
  double wsum = 0.0;
  for (double w : rule.weights) {
    CHECK(w == doctest::Approx(1e-3));
    wsum += w;
  }
  CHECK(std::abs(wsum - 1.0) <= 1e-12);
  for (const auto& node : rule.nodes)
    for (double y : node) CHECK((y >= -1.0 && y <= 1.0));

  // offsets shift the index window
  QuadratureRule shifted = halton_rule(3, 1, 2);
  CHECK(shifted.nodes[0][0] ==
        doctest::Approx(2.0 * radical_inverse(3, 2) - 1.0));
}

TEST_CASE("gauss-legendre probability-normalized rules") {
  QuadratureRule one = gauss_legendre(1);
  REQUIRE(one.size() == 1);
  CHECK(one.nodes[0][0] == 0.0);
  CHECK(one.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  QuadratureRule two = gauss_legendre(2);
  REQUIRE(two.size() == 2);
  CHECK(std::abs(two.nodes[0][0] + 1.0 / std::sqrt(3.0)) <= 1e-14);
  CHECK(std::abs(two.nodes[1][0] - 1.0 / std::sqrt(3.0)) <= 1e-14);
  CHECK(std::abs(two.weights[0] - 0.5) <= 1e-14);
  CHECK(std::abs(two.weights[1] - 0.5) <= 1e-14);
}

TEST_CASE("gauss-legendre moments") {
  for (int n = 2; n <= 12; ++n) {
    QuadratureRule rule = gauss_legendre(n);
    double odd = 0.0, second = 0.0, total = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      double x = rule.nodes[i][0], w = rule.weights[i];
      odd += w * std::pow(x, 2 * n - 1);
      second += w * x * x;
      total += w;
    }
    CHECK(std::abs(odd) <= 1e-14);
    CHECK(std::abs(second - 1.0 / 3.0) <= 1e-14);
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("sparse grid collapses to the 1d rule") {
  AnisotropyWeights gamma = AnisotropyWeights::isotropic(1);
  QuadratureRule sg = sparse_grid(2.0, gamma, 1);
  QuadratureRule gl = gauss_legendre(3);
  REQUIRE(sg.size() == 3);
  std::vector<double> xs;
  for (const auto& n : sg.nodes) xs.push_back(n[0]);
  std::sort(xs.begin(), xs.end());
  for (int i = 0; i < 3; ++i) CHECK(std::abs(xs[i] - gl.nodes[i][0]) <= 1e-14);
}

TEST_CASE("sparse grid below the smallest weight is a single node") {
  AnisotropyWeights gamma;
  gamma.gamma = {1.0, 1.5, 2.0};
  QuadratureRule sg = sparse_grid(0.5, gamma, 3);
  REQUIRE(sg.size() == 1);
  for (double y : sg.nodes[0]) CHECK(y == 0.0);
  CHECK(sg.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sparse grid integrates multilinear products exactly") {
  AnisotropyWeights gamma;
  gamma.gamma = {1.0, 1.0, 1.7};
  for (double q : {0.0, 2.0, 4.0}) {
    QuadratureRule sg = sparse_grid(q, gamma, 3);
    double integral = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < sg.size(); ++i) {
      double f = 1.0;
      for (double y : sg.nodes[i]) f *= 1.0 + 0.5 * y;
      integral += sg.weights[i] * f;
      wsum += sg.weights[i];
    }
    CHECK(std::abs(integral - 1.0) <= 1e-13);
    CHECK(std::abs(wsum - 1.0) <= 1e-12);
  }
}

TEST_CASE("sparse grid nodes stay within the enlarged index set union") {
  // node sets grow with q in the sense of the underlying downward-closed
  // index set: every node of level q lies on some member grid of level
  // q + gamma_min
  AnisotropyWeights gamma;
  gamma.gamma = {1.0, 1.3};
  QuadratureRule small = sparse_grid(2.0, gamma, 2);
  double q_big = 2.0 + 1.0;
  // enumerate member grids of the larger set
  std::set<std::pair<double, double>> big_nodes;
  double q_eff = std::max(q_big, gamma.gamma[0] + gamma.gamma[1]);
  for (int k1 = 1; gamma.gamma[0] * k1 <= q_eff; ++k1) {
    for (int k2 = 1; gamma.gamma[0] * k1 + gamma.gamma[1] * k2 <= q_eff; ++k2) {
      const Gauss1d& r1 = gauss_legendre_raw((1 << k1) - 1);
      const Gauss1d& r2 = gauss_legendre_raw((1 << k2) - 1);
      for (double x1 : r1.x)
        for (double x2 : r2.x) big_nodes.insert({x1, x2});
    }
  }
  for (const auto& node : small.nodes)
    CHECK(big_nodes.count({node[0], node[1]}) == 1);
}

TEST_CASE("halton converges on a smooth product integrand") {
  // desk-scale sanity: empirical rate beats N^{-0.8} on Pi cos(y_k)
  auto error_at = [](int dim, std::int64_t n) {
    double exact = std::pow(std::sin(1.0), dim);
    QuadratureRule rule = halton_rule(n, dim);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      double f = 1.0;
      for (double y : rule.nodes[i]) f *= std::cos(y);
      acc += rule.weights[i] * f;
    }
    return std::abs(acc - exact);
  };
  std::vector<double> log_n, log_e;
  for (int e = 6; e <= 14; e += 2) {
    log_n.push_back(std::log(static_cast<double>(1ll << e)));
    log_e.push_back(std::log(error_at(1, 1ll << e) + 1e-300));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    mx += log_n[i];
    my += log_e[i];
  }
  mx /= log_n.size();
  my /= log_e.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    num += (log_n[i] - mx) * (log_e[i] - my);
    den += (log_n[i] - mx) * (log_n[i] - mx);
  }
  CHECK(num / den <= -0.8);
  // higher dimensions carry log factors; require plain decay there
  CHECK(error_at(3, 1 << 14) < 0.1 * error_at(3, 1 << 6));
}

TEST_CASE("anisotropy weights from eigenvalue decay") {
  AnisotropyWeights w = AnisotropyWeights::from_decay({4.0, 4.0, 1.0, 0.25});
  REQUIRE(w.gamma.size() == 4);
  CHECK(w.gamma[0] == doctest::Approx(1.0));
  CHECK(w.gamma[1] == doctest::Approx(1.0));
  CHECK(w.gamma[2] == doctest::Approx(1.0));  // 0.5*log2(4) = 1
  CHECK(w.gamma[3] == doctest::Approx(2.0));  // 0.5*log2(16) = 2
  for (std::size_t i = 1; i < w.gamma.size(); ++i)
    CHECK(w.gamma[i] >= w.gamma[i - 1]);
}
