#ifndef SCATUQ_ESTIMATOR_HPP_
#define SCATUQ_ESTIMATOR_HPP_

#include <atomic>
#include <map>

#include "container_io.hpp"
#include "interface.hpp"
#include "quadrature.hpp"
#include "random_field.hpp"

namespace scatuq {
namespace mlq {

/// Per-level sample counts N_l = max(2^(budget_log2 - rate_bits*l), n_min).
std::vector<std::int64_t> allocate_samples(int max_level, int rate_bits,
                                           std::int64_t n_min, int budget_log2);

/// Level hierarchy for the telescoping estimators: spatial levels 0..L, the
/// parameter-domain rule paired with spatial level l is the quadrature level
/// L - l (more nodes for cheaper solves).
struct LevelHierarchy {
  int max_level = 0;
  int dim = 0;
  quad::RuleKind kind = quad::RuleKind::qmc;
  std::vector<std::int64_t> samples;  // per spatial level
  std::int64_t halton_offset = 0;
  quad::AnisotropyWeights gamma;  // sparse-grid anisotropy
  double sg_q0 = 0.0;
  double sg_dq = 1.0;

  quad::QuadratureRule rule_for_stream(int level) const;
};

/// Makes the (level, y) -> CauchyData evaluations of a run; memoizes in
/// memory and optionally on disk. Coupled multilevel sampling reuses the
/// coarse-level evaluations of finer streams through this cache.
class ModelCache {
 public:
  using Evaluator =
      std::function<iface::CauchyData(int level, const std::vector<double>& y)>;

  ModelCache(Evaluator eval, std::string disk_dir, std::uint64_t run_hash);

  iface::CauchyData evaluate(int level, const std::vector<double>& y);

  std::int64_t memory_hits() const { return memory_hits_; }
  std::int64_t disk_hits() const { return disk_hits_; }
  std::int64_t misses() const { return misses_; }

 private:
  Evaluator eval_;
  std::string disk_dir_;
  std::uint64_t run_hash_;
  std::map<std::pair<int, std::vector<double>>, iface::CauchyData> memo_;
  std::mutex mutex_;
  std::atomic<std::int64_t> memory_hits_{0}, disk_hits_{0}, misses_{0};
};

template <class V>
struct Telescoped {
  V total;
  std::vector<V> per_stream;  // one contribution per spatial level
};

/// Core telescoping loop: for every stream l = 0..L and every node y of the
/// stream's rule, evaluates the coupled pair (l, y), (l-1, y) and reports it
/// to `visit` in deterministic node order with the rule weight.
void telescope_visit(
    const LevelHierarchy& h, int threads, ModelCache& cache,
    const std::function<void(int stream, std::int64_t node, double weight,
                             const iface::CauchyData& fine,
                             const iface::CauchyData* coarse,
                             const std::vector<double>& y)>& visit);

/// Multilevel mean of the Cauchy data (eq. of the telescoped expectation).
Telescoped<iface::CauchyData> ml_mean(const LevelHierarchy& h, int threads,
                                      ModelCache& cache, int num_nodes);

/// Multilevel second moment: per node the outer-product difference
/// rho^(l) x rho^(l) - rho^(l-1) x rho^(l-1) accumulated into four blocks.
Telescoped<iface::SecondMomentData> ml_second_moment(const LevelHierarchy& h,
                                                     int threads,
                                                     ModelCache& cache,
                                                     int num_nodes);

/// Forward model bound to one run configuration: deform, assemble, solve,
/// sample the interface Cauchy data.
struct ForwardModel {
  const rf::KLExpansion* kl = nullptr;
  const iface::InterfaceGrid* grid = nullptr;
  bem::WaveContext ctx{1.0, Vector3d(0, 0, 1)};
  int density_degree = 2;
  bem::QuadratureConfig quad;

  iface::CauchyData operator()(int level, const std::vector<double>& y) const;
  std::uint64_t run_hash() const;
};

}  // namespace mlq
}  // namespace scatuq

#endif  // SCATUQ_ESTIMATOR_HPP_
