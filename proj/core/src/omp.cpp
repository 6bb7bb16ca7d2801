#include <gridshield/omp.hpp>

#include <gridshield/errors.hpp>
#include <gridshield/projection.hpp>
#include <gridshield/statistics.hpp>

#include <cmath>
#include <vector>

namespace gridshield {

IdentificationResult omp_identify(const Eigen::MatrixXd& atoms, const Support& ground, const Eigen::VectorXd& dz_L,
                                  const OmpConfig& config) {
  if (config.k_c < 1) throw ConfigError("K_c must be at least 1");
  if (config.gamma_omp < 0.0) throw ConfigError("gamma_omp must be non-negative");
  if (dz_L.size() != atoms.rows())
    throw DimensionError("measurement length " + std::to_string(dz_L.size()) + " does not match dictionary rows " +
                         std::to_string(atoms.rows()));

  const auto n = ground.size();
  const auto m = atoms.rows();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = atoms.col(ground[i]).squaredNorm();

  std::vector<bool> used(n, false);
  Eigen::MatrixXd q(m, std::min<Index>(config.k_c, m));
  Index rank = 0;
  Eigen::VectorXd r = dz_L;
  IdentificationResult out;

  bool first = true;
  while (static_cast<int>(out.support.size()) < config.k_c && rank < q.cols()) {
    double best = -1.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i] || norms[i] == 0.0) continue;
      const double ip = atoms.col(ground[i]).dot(r);
      const double e = ip * ip / norms[i];
      if (e > best) {
        best = e;
        pick = i;
      }
    }
    if (pick == n) break;
    if (first) out.detection_statistic = best;
    first = false;
    if (best < config.gamma_omp) break;

    // Gram-Schmidt against the chosen atoms, twice for stability
    Eigen::VectorXd u = atoms.col(ground[pick]);
    for (int pass = 0; pass < 2; ++pass) u -= q.leftCols(rank) * (q.leftCols(rank).transpose() * u);
    const double un = u.norm();
    used[pick] = true;
    if (un <= kRankTolerance * std::sqrt(norms[pick])) {
      // atom already in the span; it cannot reduce the residual
      continue;
    }
    q.col(rank) = u / un;
    r -= q.col(rank) * q.col(rank).dot(r);
    ++rank;
    out.support.push_back(ground[pick]);
    out.trace.push_back(OmpStep{ground[pick], best, r.squaredNorm()});
  }
  out.support = normalized(out.support);
  out.attack_detected = !out.support.empty();
  if (out.attack_detected) out.values = ml_attack_estimate(select_columns(atoms, out.support), dz_L);
  return out;
}

IdentificationResult omp_identify(const TopologyMatrix& topo, const Eigen::VectorXd& dz_L, const OmpConfig& config) {
  return omp_identify(topo.load_block(), topo.restricted_states(), dz_L, config);
}

double omp_null_statistic(const Eigen::MatrixXd& atoms, const Support& ground, const Eigen::VectorXd& v) {
  if (ground.empty()) return 0.0;
  return single_node_energies(atoms, ground, v).maxCoeff();
}

double calibrate_gamma_omp(const Eigen::MatrixXd& atoms, const Support& ground, const NullSampler& sampler,
                           double alpha, std::size_t n_null) {
  if (n_null < 100) throw ConfigError("at least 100 null runs are needed for calibration");
  std::vector<double> stats(n_null);
  for (std::size_t i = 0; i < n_null; ++i) stats[i] = omp_null_statistic(atoms, ground, sampler(i));
  return null_threshold(stats, alpha);
}

}  // namespace gridshield
