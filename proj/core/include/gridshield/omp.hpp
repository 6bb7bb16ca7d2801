#pragma once

#include <gridshield/grid_model.hpp>
#include <gridshield/types.hpp>

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace gridshield {

struct OmpConfig {
  int k_c = 6;
  double gamma_omp = 0.0;
};

/// Greedy recovery over `ground`. Each step adds the unselected atom with the
/// largest single-atom projection energy of the residual, unless that energy is
/// below gamma_omp, in which case the current support is returned. Ties go to
/// the smallest index. `detection_statistic` is the first-step best energy.
IdentificationResult omp_identify(const Eigen::MatrixXd& atoms, const Support& ground, const Eigen::VectorXd& dz_L,
                                  const OmpConfig& config);
IdentificationResult omp_identify(const TopologyMatrix& topo, const Eigen::VectorXd& dz_L, const OmpConfig& config);

/// Largest single-atom energy of `v` over `ground`.
double omp_null_statistic(const Eigen::MatrixXd& atoms, const Support& ground, const Eigen::VectorXd& v);

/// Draws the load-row difference of null trial `i`.
using NullSampler = std::function<Eigen::VectorXd(std::size_t i)>;

/// (1 - alpha) empirical quantile of omp_null_statistic over n_null samples.
/// Throws ConfigError for n_null < 100 or alpha outside (0, 1).
double calibrate_gamma_omp(const Eigen::MatrixXd& atoms, const Support& ground, const NullSampler& sampler,
                           double alpha, std::size_t n_null);

}  // namespace gridshield
