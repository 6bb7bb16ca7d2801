#pragma once

#include <gridshield/gic.hpp>
#include <gridshield/types.hpp>

#include <Eigen/Dense>

namespace gridshield {

/// ||P dz_L||^2 / sigma_e2. Throws DegenerateSupportError for an empty or
/// dependent support.
double glrt_statistic(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L, const Support& support,
                      double sigma_e2);

/// GLRT on dz_L with the true load-change image removed first.
double oracle_glrt_statistic(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L, const Support& support,
                             const Eigen::VectorXd& true_load_term, double sigma_e2);

/// gic_select on dz_L - true_load_term.
IdentificationResult oracle_gic_select(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L,
                                       const CandidateFamily& family, const PenaltyConfig& penalty,
                                       const Eigen::VectorXd& true_load_term, double sigma_e2);

/// Generalized Marcum Q of order v: the survival function at b^2 of a
/// non-central chi-square with 2v degrees of freedom and noncentrality a^2.
/// Throws DomainError for v < 0.5, a < 0 or b < 0.
double marcum_q(double v, double a, double b);

struct DetectionOperatingPoint {
  double p_fa = 0.0;
  double p_d = 0.0;
  double threshold = 0.0;
  std::size_t support_size = 0;
  double noncentrality_null = 0.0;  // chi-square noncentrality under H0
  double noncentrality_alt = 0.0;   // under H1
};

/// P_fa = Q_{r/2}(sqrt(lambda_0), sqrt(gamma)), P_d = Q_{r/2}(sqrt(lambda_1), sqrt(gamma))
/// for a GLRT on r = support_size dimensions with threshold gamma.
DetectionOperatingPoint pfa_pd_formulas(std::size_t support_size, double noncentrality_fa, double noncentrality_d,
                                        double threshold);

struct FalseAlarmBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// False-alarm range when the load-change energy on the load rows is at most eta:
/// [Q_{r/2}(0, sqrt(gamma)), Q_{r/2}(sqrt(eta / sigma_e2), sqrt(gamma))].
FalseAlarmBounds false_alarm_bounds(std::size_t support_size, double eta, double sigma_e2, double threshold);

/// Central chi-square (1 - alpha) quantile with r degrees of freedom.
double glrt_threshold(std::size_t support_size, double alpha);

/// Fraction of the load-change energy captured by the support's subspace.
double captured_fraction(const Eigen::MatrixXd& atoms, const Support& support, const Eigen::VectorXd& load_term);

}  // namespace gridshield
