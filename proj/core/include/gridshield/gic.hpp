#pragma once

#include <gridshield/grid_model.hpp>
#include <gridshield/projection.hpp>
#include <gridshield/types.hpp>

#include <Eigen/Dense>

#include <vector>

namespace gridshield {

/// All supports of size 1..k_c drawn from a ground set, ordered by cardinality
/// and then lexicographically.
class CandidateFamily {
 public:
  /// Throws ConfigError for k_c < 1 or a family larger than `max_size`.
  CandidateFamily(const Support& ground, int k_c, std::size_t max_size = 5'000'000);

  const std::vector<Support>& supports() const { return supports_; }
  const Support& ground_set() const { return ground_; }
  int k_c() const { return k_c_; }
  std::size_t size() const { return supports_.size(); }

 private:
  Support ground_;
  int k_c_;
  std::vector<Support> supports_;
};

/// tau(k) = zeta k for k >= 1. The null hypothesis scores +gamma_gic, so a
/// support wins only when its penalized energy clears gamma_gic.
struct PenaltyConfig {
  double zeta = 2.0;
  double gamma_gic = 0.0;
};

/// Score of one support: ||P dz_L||^2 / sigma_e2 - zeta |support|, or gamma_gic
/// for the empty support. Throws DegenerateSupportError for dependent columns.
double gic_statistic(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L, const Support& support,
                     const PenaltyConfig& penalty, double sigma_e2);
double gic_statistic(const TopologyMatrix& topo, const Eigen::VectorXd& dz_L, const Support& support,
                     const PenaltyConfig& penalty, double sigma_e2);

/// Exhaustive selection over the family plus the null. The score table lists the
/// null first and then the family in order; degenerate supports score -inf and
/// are also listed in `skipped`. Ties go to the earliest entry.
/// `detection_statistic` is the best non-null score before gamma_gic is applied.
IdentificationResult gic_select(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L,
                                const CandidateFamily& family, const PenaltyConfig& penalty, double sigma_e2);
IdentificationResult gic_select(const TopologyMatrix& topo, const Eigen::VectorXd& dz_L,
                                const CandidateFamily& family, const PenaltyConfig& penalty, double sigma_e2);

/// True iff the selected support is nonempty.
bool detect_from_selection(const IdentificationResult& result);

/// max over the family of ||P dz_L||^2 / sigma_e2 - zeta |support|; the quantity
/// whose null quantile calibrates gamma_gic.
double gic_null_statistic(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L, const CandidateFamily& family,
                          double zeta, double sigma_e2);

}  // namespace gridshield
