#include "bayes.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>

namespace scatuq {
namespace bayes {

double gaussian_potential(const VectorXcd& delta, const VectorXcd& g,
                          const MatrixXd& sigma, PotentialVariant variant) {
  require(delta.size() == g.size() && sigma.rows() == delta.size() &&
              sigma.cols() == delta.size(),
          ErrorCode::invalid_argument, "gaussian_potential: dimension mismatch");
  Eigen::LLT<MatrixXd> llt(sigma);
  require(llt.info() == Eigen::Success, ErrorCode::invalid_argument,
          "gaussian_potential: covariance is not SPD");
  VectorXcd r = delta - g;
  VectorXcd x = llt.matrixL().solve(r);
  double quadratic = x.squaredNorm();
  switch (variant) {
    case PotentialVariant::half_squared:
      return 0.5 * quadratic;
    case PotentialVariant::plain_norm:
      return std::sqrt(quadratic);
  }
  return 0.5 * quadratic;
}

double NormalSampler::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform01(), u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

std::vector<int> observation_nodes(const iface::InterfaceGrid& grid) {
  std::vector<int> nodes;
  for (int p = 0; p < grid.surface().num_patches(); ++p)
    nodes.push_back(grid.midpoint_node(p));
  return nodes;
}

VectorXcd observe(const iface::CauchyData& data,
                  const std::vector<int>& nodes) {
  VectorXcd out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out(i) = data.trace(nodes[i]);
  return out;
}

ObservationSetup synthesize_observations(mlq::ModelCache& cache,
                                         const iface::InterfaceGrid& grid,
                                         const std::vector<double>& y_star,
                                         int level, double sigma_rel,
                                         std::uint64_t seed) {
  require(sigma_rel >= 0.0, ErrorCode::invalid_argument,
          "synthesize_observations: negative noise level");
  ObservationSetup setup;
  setup.nodes = observation_nodes(grid);
  setup.seed = seed;
  VectorXcd g = observe(cache.evaluate(level, y_star), setup.nodes);
  int n = static_cast<int>(g.size());
  setup.sigma_scalar = sigma_rel * g.cwiseAbs().maxCoeff();
  setup.sigma = setup.sigma_scalar * setup.sigma_scalar *
                MatrixXd::Identity(n, n);
  setup.delta = g;
  if (setup.sigma_scalar > 0.0) {
    // complex circular Gaussian: independent real and imaginary parts with
    // covariance Sigma / 2
    NormalSampler sampler(seed);
    double component_std = setup.sigma_scalar / std::sqrt(2.0);
    for (int i = 0; i < n; ++i) {
      double re = component_std * sampler.normal();
      double im = component_std * sampler.normal();
      setup.delta(i) += Complex(re, im);
    }
  }
  return setup;
}

std::vector<SurfaceSamplePoint> surface_sample_grid(
    const geo::MultipatchSurface& s, int per_dir) {
  require(per_dir >= 1, ErrorCode::invalid_argument,
          "surface_sample_grid: per_dir < 1");
  std::vector<SurfaceSamplePoint> points;
  for (int p = 0; p < s.num_patches(); ++p) {
    for (int j = 0; j < per_dir; ++j) {
      for (int i = 0; i < per_dir; ++i) {
        SurfaceSamplePoint pt;
        pt.patch = p;
        pt.u = per_dir == 1 ? 0.5 : static_cast<double>(i) / (per_dir - 1);
        pt.v = per_dir == 1 ? 0.5 : static_cast<double>(j) / (per_dir - 1);
        pt.prior_position = s.patch(p).eval(pt.u, pt.v);
        points.push_back(pt);
      }
    }
  }
  return points;
}

PosteriorSummary ml_ratio_posterior(const mlq::LevelHierarchy& h, int threads,
                                    mlq::ModelCache& cache,
                                    const ObservationSetup& setup,
                                    const rf::KLExpansion& kl,
                                    const std::vector<SurfaceSamplePoint>& points,
                                    PotentialVariant variant,
                                    double extra_potential_shift) {
  const int rank = kl.rank();
  const int np = static_cast<int>(points.size());

  // mode values at the report points (level independent)
  MatrixXd mode_at(3 * np, rank);
  VectorXd mean_at = VectorXd::Zero(3 * np);
  for (int p = 0; p < np; ++p) {
    for (int k = 0; k < rank; ++k) {
      Vector3d m = std::sqrt(kl.eigenvalues[k]) *
                   kl.mode_value(k, points[p].patch, points[p].u, points[p].v);
      mode_at.block<3, 1>(3 * p, k) = m;
    }
    std::vector<double> zero(rank, 0.0);
    mean_at.segment<3>(3 * p) =
        kl.displacement(points[p].patch, points[p].u, points[p].v, zero);
  }

  // pass 1: potentials at every coupled node
  struct NodeRecord {
    int stream;
    double weight;
    double phi_fine;
    double phi_coarse;  // unused for stream 0
    std::vector<double> y;
  };
  std::vector<NodeRecord> records;
  mlq::telescope_visit(
      h, threads, cache,
      [&](int stream, std::int64_t, double w, const iface::CauchyData& fine,
          const iface::CauchyData* coarse, const std::vector<double>& y) {
        NodeRecord rec;
        rec.stream = stream;
        rec.weight = w;
        rec.y = y;
        rec.phi_fine = gaussian_potential(
            setup.delta, observe(fine, setup.nodes), setup.sigma, variant) +
            extra_potential_shift;
        rec.phi_coarse =
            coarse ? gaussian_potential(setup.delta, observe(*coarse, setup.nodes),
                                        setup.sigma, variant) +
                         extra_potential_shift
                   : 0.0;
        records.push_back(std::move(rec));
      });

  // shared max-shift: exp(-(phi - shift)) stays in range and cancels in the
  // ratio exactly
  double shift = std::numeric_limits<double>::infinity();
  for (const auto& rec : records) {
    shift = std::min(shift, rec.phi_fine);
    if (rec.stream > 0) shift = std::min(shift, rec.phi_coarse);
  }

  // pass 2: telescoped numerator and denominator over identical nodes
  double z_shifted = 0.0;
  double ess_num = 0.0, ess_den = 0.0;
  VectorXd y_num = VectorXd::Zero(rank);
  VectorXd num_mean = VectorXd::Zero(3 * np);
  std::vector<Matrix3d> num_second(np, Matrix3d::Zero());
  for (const auto& rec : records) {
    double rho_f = std::exp(-(rec.phi_fine - shift));
    double rho_c = rec.stream > 0 ? std::exp(-(rec.phi_coarse - shift)) : 0.0;
    double d = rec.weight * (rho_f - rho_c);
    z_shifted += d;
    if (rec.stream == 0) {
      double a = rec.weight * rho_f;
      ess_num += a;
      ess_den += a * a;
    }
    VectorXd chi = mean_at;
    for (int k = 0; k < rank; ++k) chi += rec.y[k] * mode_at.col(k);
    for (int k = 0; k < rank; ++k) y_num(k) += d * rec.y[k];
    num_mean += d * chi;
    for (int p = 0; p < np; ++p) {
      Vector3d c = chi.segment<3>(3 * p);
      num_second[p] += d * c * c.transpose();
    }
  }
  require(z_shifted > 0.0, ErrorCode::numerics,
          "ratio estimator failed: nonpositive normalization estimate "
          "(insufficient sampling for this noise level)");

  PosteriorSummary out;
  out.log_z = std::log(z_shifted) - shift;
  out.z = std::exp(out.log_z);
  out.ess = ess_den > 0.0 ? ess_num * ess_num / ess_den : 0.0;
  out.y_mean = y_num / z_shifted;
  out.points = points;
  out.mean.resize(np);
  out.second.resize(np);
  out.variance.resize(np);
  for (int p = 0; p < np; ++p) {
    out.mean[p] = num_mean.segment<3>(3 * p) / z_shifted;
    out.second[p] = num_second[p] / z_shifted;
    out.variance[p] = out.second[p] - out.mean[p] * out.mean[p].transpose();
  }
  return out;
}

void write_posterior_report(const std::string& path,
                            const PosteriorSummary& summary) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open " + path);
  out.precision(17);
  out << "patch,u,v,prior_x,prior_y,prior_z,post_x,post_y,post_z,"
         "mean_dx,mean_dy,mean_dz,"
         "two_sigma_x,two_sigma_y,two_sigma_z\n";
  for (std::size_t p = 0; p < summary.points.size(); ++p) {
    const auto& pt = summary.points[p];
    Vector3d post = pt.prior_position + summary.mean[p];
    Vector3d two_sigma;
    for (int c = 0; c < 3; ++c)
      two_sigma[c] = 2.0 * std::sqrt(std::max(summary.variance[p](c, c), 0.0));
    out << pt.patch << "," << pt.u << "," << pt.v << ","
        << pt.prior_position.x() << "," << pt.prior_position.y() << ","
        << pt.prior_position.z() << "," << post.x() << "," << post.y() << ","
        << post.z() << "," << summary.mean[p].x() << "," << summary.mean[p].y()
        << "," << summary.mean[p].z() << "," << two_sigma.x() << ","
        << two_sigma.y() << "," << two_sigma.z() << "\n";
  }
}

}  // namespace bayes
}  // namespace scatuq
