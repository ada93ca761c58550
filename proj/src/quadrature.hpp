#ifndef SCATUQ_QUADRATURE_HPP_
#define SCATUQ_QUADRATURE_HPP_

#include <string>
#include <vector>

#include "common.hpp"

namespace scatuq {
namespace quad {

/// 1D Gauss-Legendre rule on [-1,1], weights summing to 2.
struct Gauss1d {
  std::vector<double> x;
  std::vector<double> w;
};

/// Nodes by Newton iteration on Legendre polynomials to 1e-15; midpoints of
/// odd rules are snapped to exactly 0 and nodes are exactly antisymmetric.
const Gauss1d& gauss_legendre_raw(int n);

/// Same rule mapped to [0,1] with weights summing to 1.
const Gauss1d& gauss01(int n);

enum class RuleKind { qmc, sparse_grid, tensor };

/// Quadrature rule on Gamma = [-1,1]^M against the uniform probability
/// measure: weights sum to 1.
struct QuadratureRule {
  int dim = 0;
  RuleKind kind = RuleKind::tensor;
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// 1D Gauss-Legendre on [-1,1], probability-normalized (weights sum to 1).
QuadratureRule gauss_legendre(int n);

/// Halton points in the first M prime bases, indices offset+1..offset+N,
/// affinely mapped to [-1,1]^M; all weights 1/N. No scrambling.
QuadratureRule halton_rule(std::int64_t n, int dim, std::int64_t offset = 0);

/// Radical inverse of index i in the given base (index 0 maps to 0).
double radical_inverse(std::int64_t index, int base);

std::vector<int> first_primes(int m);

/// Per-dimension anisotropy weights, positive and nondecreasing.
struct AnisotropyWeights {
  std::vector<double> gamma;
  /// gamma_k = max(1, 0.5*log2(lambda_1/lambda_k)), made nondecreasing.
  static AnisotropyWeights from_decay(const std::vector<double>& eigenvalues);
  static AnisotropyWeights isotropic(int dim);
};

/// Anisotropic Smolyak rule over 1D Gauss-Legendre sequences n_j = 2^j - 1,
/// j >= 1, with index set { k >= 1 : sum_i gamma_i k_i <= max(q, sum gamma) }
/// and inclusion-exclusion combination weights. Duplicate nodes are merged.
QuadratureRule sparse_grid(double q, const AnisotropyWeights& gamma, int dim);

void dump_rule_csv(const QuadratureRule& rule, const std::string& path);

}  // namespace quad
}  // namespace scatuq

#endif  // SCATUQ_QUADRATURE_HPP_
