#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>

namespace scatuq {
namespace quad {

namespace {

Gauss1d compute_gauss(int n) {
  Gauss1d rule;
  rule.x.assign(n, 0.0);
  rule.w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev initial guess for the i-th root (descending order)
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_n(x) and P'_n(x)
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    if (std::abs(x) < 1e-15) x = 0.0;
    rule.x[n - 1 - i] = x;
    rule.x[i] = -x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.w[i] = w;
    rule.w[n - 1 - i] = w;
  }
  return rule;
}

std::mutex cache_mutex;

}  // namespace

const Gauss1d& gauss_legendre_raw(int n) {
  require(n >= 1, ErrorCode::invalid_argument, "gauss_legendre: n < 1");
  static std::map<int, Gauss1d> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
  return it->second;
}

const Gauss1d& gauss01(int n) {
  static std::map<int, Gauss1d> cache;
  const Gauss1d& raw = gauss_legendre_raw(n);
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    Gauss1d r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
      r.x[i] = 0.5 * (raw.x[i] + 1.0);
      r.w[i] = 0.5 * raw.w[i];
    }
    it = cache.emplace(n, std::move(r)).first;
  }
  return it->second;
}

QuadratureRule gauss_legendre(int n) {
  const Gauss1d& raw = gauss_legendre_raw(n);
  QuadratureRule rule;
  rule.dim = 1;
  rule.kind = RuleKind::tensor;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back({raw.x[i]});
    rule.weights.push_back(0.5 * raw.w[i]);
  }
  return rule;
}

double radical_inverse(std::int64_t index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

std::vector<int> first_primes(int m) {
  std::vector<int> primes;
  int candidate = 2;
  while (static_cast<int>(primes.size()) < m) {
    bool is_prime = true;
    for (int p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        is_prime = false;
        break;
      }
    }
    if (is_prime) primes.push_back(candidate);
    ++candidate;
  }
  return primes;
}

QuadratureRule halton_rule(std::int64_t n, int dim, std::int64_t offset) {
  require(n >= 1 && dim >= 1, ErrorCode::invalid_argument,
          "halton_rule: n >= 1 and dim >= 1 required");
  require(offset >= 0, ErrorCode::invalid_argument, "halton_rule: offset < 0");
  std::vector<int> bases = first_primes(dim);
  QuadratureRule rule;
  rule.dim = dim;
  rule.kind = RuleKind::qmc;
  rule.nodes.reserve(n);
  rule.weights.assign(n, 1.0 / static_cast<double>(n));
  for (std::int64_t i = 1; i <= n; ++i) {
    std::vector<double> y(dim);
    for (int d = 0; d < dim; ++d)
      y[d] = 2.0 * radical_inverse(offset + i, bases[d]) - 1.0;
    rule.nodes.push_back(std::move(y));
  }
  return rule;
}

AnisotropyWeights AnisotropyWeights::from_decay(
    const std::vector<double>& eigenvalues) {
  require(!eigenvalues.empty(), ErrorCode::invalid_argument,
          "anisotropy: empty spectrum");
  AnisotropyWeights w;
  double l1 = eigenvalues.front();
  double running = 1.0;
  for (double lk : eigenvalues) {
    double g = 1.0;
    if (lk > 0.0 && l1 > 0.0) g = std::max(1.0, 0.5 * std::log2(l1 / lk));
    running = std::max(running, g);
    w.gamma.push_back(running);
  }
  return w;
}

AnisotropyWeights AnisotropyWeights::isotropic(int dim) {
  AnisotropyWeights w;
  w.gamma.assign(dim, 1.0);
  return w;
}

QuadratureRule sparse_grid(double q, const AnisotropyWeights& gamma, int dim) {
  require(dim >= 1, ErrorCode::invalid_argument, "sparse_grid: dim < 1");
  require(static_cast<int>(gamma.gamma.size()) >= dim,
          ErrorCode::invalid_argument, "sparse_grid: missing weights");
  for (int d = 0; d < dim; ++d)
    require(gamma.gamma[d] > 0.0, ErrorCode::invalid_argument,
            "sparse_grid: weights must be positive");
  double gamma_sum = 0.0;
  for (int d = 0; d < dim; ++d) gamma_sum += gamma.gamma[d];
  const double q_eff = std::max(q, gamma_sum);

  // enumerate the downward-closed index set {k >= 1 : <gamma, k> <= q_eff}
  std::vector<std::vector<int>> index_set;
  std::vector<int> k(dim, 1);
  std::function<void(int, double)> enumerate = [&](int d, double used) {
    if (d == dim) {
      index_set.push_back(k);
      return;
    }
    for (k[d] = 1;; ++k[d]) {
      double total = used + gamma.gamma[d] * k[d];
      if (total > q_eff + 1e-12) break;
      enumerate(d + 1, total);
    }
  };
  enumerate(0, 0.0);
  require(!index_set.empty(), ErrorCode::invalid_argument,
          "sparse_grid: empty index set");

  std::map<std::vector<int>, int> in_set;
  for (std::size_t i = 0; i < index_set.size(); ++i) in_set[index_set[i]] = 1;

  // inclusion-exclusion combination coefficients
  auto rule_size = [](int level) { return (1 << level) - 1; };
  std::map<std::vector<double>, double> accum;
  for (const auto& idx : index_set) {
    double coeff = 0.0;
    std::vector<int> shifted(dim);
    for (int mask = 0; mask < (1 << dim); ++mask) {
      for (int d = 0; d < dim; ++d)
        shifted[d] = idx[d] + ((mask >> d) & 1 ? 1 : 0);
      if (in_set.count(shifted))
        coeff += (__builtin_popcount(mask) % 2 == 0) ? 1.0 : -1.0;
    }
    if (coeff == 0.0) continue;
    // tensor-product accumulation of the member rule
    std::vector<const Gauss1d*> rules(dim);
    std::vector<int> sizes(dim);
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) {
      sizes[d] = rule_size(idx[d]);
      rules[d] = &gauss_legendre_raw(sizes[d]);
      total *= sizes[d];
    }
    std::vector<int> c(dim, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::vector<double> node(dim);
      double w = coeff;
      for (int d = 0; d < dim; ++d) {
        node[d] = rules[d]->x[c[d]];
        w *= 0.5 * rules[d]->w[c[d]];
      }
      accum[node] += w;
      for (int d = 0; d < dim; ++d) {
        if (++c[d] < sizes[d]) break;
        c[d] = 0;
      }
    }
  }

  QuadratureRule rule;
  rule.dim = dim;
  rule.kind = RuleKind::sparse_grid;
  for (const auto& [node, w] : accum) {
    if (w == 0.0) continue;
    rule.nodes.push_back(node);
    rule.weights.push_back(w);
  }
  return rule;
}

void dump_rule_csv(const QuadratureRule& rule, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open " + path);
  for (int d = 0; d < rule.dim; ++d) out << "y" << d << ",";
  out << "weight\n";
  out.precision(17);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    for (int d = 0; d < rule.dim; ++d) out << rule.nodes[i][d] << ",";
    out << rule.weights[i] << "\n";
  }
}

}  // namespace quad
}  // namespace scatuq
