#ifndef SCATUQ_BAYES_HPP_
#define SCATUQ_BAYES_HPP_

#include <random>

#include "estimator.hpp"

namespace scatuq {
namespace bayes {

/// Misfit convention: the default is 0.5 * ||delta - G||_Sigma^2 in the
/// Hermitian inner product (the complex circular-Gaussian likelihood); the
/// plain_norm variant drops the square and the half.
enum class PotentialVariant { half_squared, plain_norm };

/// Phi_Sigma(delta, g) computed through the Cholesky factor of Sigma.
double gaussian_potential(const VectorXcd& delta, const VectorXcd& g,
                          const MatrixXd& sigma,
                          PotentialVariant variant = PotentialVariant::half_squared);

/// Deterministic standard-normal stream (Box-Muller over mt19937_64).
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}
  double uniform01() { return ((rng_() >> 11) + 0.5) * 0x1p-53; }
  double normal();

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Observation operator: point values of u_s at the interface patch
/// midpoints.
std::vector<int> observation_nodes(const iface::InterfaceGrid& grid);
VectorXcd observe(const iface::CauchyData& data, const std::vector<int>& nodes);

struct ObservationSetup {
  std::vector<int> nodes;
  VectorXcd delta;
  MatrixXd sigma;       // SPD noise covariance
  double sigma_scalar = 0.0;
  std::uint64_t seed = 0;
};

/// delta = G(y*) + eta with eta complex circular Gaussian, Sigma = sigma^2 I,
/// sigma = sigma_rel * max |G(y*)|. sigma_rel = 0 returns the exact data.
ObservationSetup synthesize_observations(mlq::ModelCache& cache,
                                         const iface::InterfaceGrid& grid,
                                         const std::vector<double>& y_star,
                                         int level, double sigma_rel,
                                         std::uint64_t seed);

struct SurfaceSamplePoint {
  int patch;
  double u, v;
  Vector3d prior_position;
};

std::vector<SurfaceSamplePoint> surface_sample_grid(
    const geo::MultipatchSurface& s, int per_dir);

struct PosteriorSummary {
  double log_z = 0.0;  // log of the normalization estimate
  double z = 0.0;
  double ess = 0.0;  // effective sample size of the finest-quadrature stream
  VectorXd y_mean;   // posterior mean of the parameter vector
  std::vector<SurfaceSamplePoint> points;
  std::vector<Vector3d> mean;       // posterior mean displacement
  std::vector<Matrix3d> second;     // posterior second moment
  std::vector<Matrix3d> variance;   // second - mean mean^T
};

/// Multilevel ratio estimator: numerator and denominator telescoped over the
/// same coupled nodes, log-sum-exp shifted by the shared minimum potential
/// (the shift cancels in the ratio exactly).
PosteriorSummary ml_ratio_posterior(const mlq::LevelHierarchy& h, int threads,
                                    mlq::ModelCache& cache,
                                    const ObservationSetup& setup,
                                    const rf::KLExpansion& kl,
                                    const std::vector<SurfaceSamplePoint>& points,
                                    PotentialVariant variant =
                                        PotentialVariant::half_squared,
                                    double extra_potential_shift = 0.0);

/// Per-point posterior report: prior/posterior positions and componentwise
/// 2-sigma intervals.
void write_posterior_report(const std::string& path,
                            const PosteriorSummary& summary);

}  // namespace bayes
}  // namespace scatuq

#endif  // SCATUQ_BAYES_HPP_
