#include <gridshield/analysis.hpp>

#include <gridshield/errors.hpp>
#include <gridshield/projection.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

namespace gridshield {

double glrt_statistic(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L, const Support& support,
                      double sigma_e2) {
  if (!(sigma_e2 > 0.0)) throw DomainError("sigma_e2 must be positive");
  if (support.empty()) throw DegenerateSupportError("GLRT needs a nonempty support");
  const auto e = support_energy(atoms, support, dz_L);
  if (!e) throw DegenerateSupportError("support " + to_string(support) + " has dependent columns");
  return *e / sigma_e2;
}

double oracle_glrt_statistic(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L, const Support& support,
                             const Eigen::VectorXd& true_load_term, double sigma_e2) {
  if (true_load_term.size() != dz_L.size()) throw DimensionError("load term length mismatch");
  return glrt_statistic(atoms, dz_L - true_load_term, support, sigma_e2);
}

IdentificationResult oracle_gic_select(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L,
                                       const CandidateFamily& family, const PenaltyConfig& penalty,
                                       const Eigen::VectorXd& true_load_term, double sigma_e2) {
  if (true_load_term.size() != dz_L.size()) throw DimensionError("load term length mismatch");
  return gic_select(atoms, dz_L - true_load_term, family, penalty, sigma_e2);
}

double marcum_q(double v, double a, double b) {
  if (!(v >= 0.5) || !(a >= 0.0) || !(b >= 0.0) || !std::isfinite(v) || !std::isfinite(a))
    throw DomainError("marcum_q needs v >= 0.5, a >= 0, b >= 0");
  if (b == 0.0) return 1.0;
  if (!std::isfinite(b)) return 0.0;
  if (a == 0.0) return boost::math::gamma_q(v, b * b / 2.0);
  const boost::math::non_central_chi_squared_distribution<double> dist(2.0 * v, a * a);
  return boost::math::cdf(boost::math::complement(dist, b * b));
}

DetectionOperatingPoint pfa_pd_formulas(std::size_t support_size, double noncentrality_fa, double noncentrality_d,
                                        double threshold) {
  if (support_size < 1) throw DomainError("support size must be at least 1");
  if (noncentrality_fa < 0.0 || noncentrality_d < 0.0) throw DomainError("noncentralities must be non-negative");
  if (threshold < 0.0) throw DomainError("threshold must be non-negative");
  const double v = static_cast<double>(support_size) / 2.0;
  DetectionOperatingPoint op;
  op.support_size = support_size;
  op.threshold = threshold;
  op.noncentrality_null = noncentrality_fa;
  op.noncentrality_alt = noncentrality_d;
  op.p_fa = marcum_q(v, std::sqrt(noncentrality_fa), std::sqrt(threshold));
  op.p_d = marcum_q(v, std::sqrt(noncentrality_d), std::sqrt(threshold));
  return op;
}

FalseAlarmBounds false_alarm_bounds(std::size_t support_size, double eta, double sigma_e2, double threshold) {
  if (eta < 0.0 || !(sigma_e2 > 0.0)) throw DomainError("eta must be non-negative and sigma_e2 positive");
  const auto op = pfa_pd_formulas(support_size, 0.0, eta / sigma_e2, threshold);
  return FalseAlarmBounds{op.p_fa, op.p_d};
}

double glrt_threshold(std::size_t support_size, double alpha) {
  if (support_size < 1 || !(alpha > 0.0 && alpha < 1.0)) throw DomainError("need r >= 1 and alpha in (0, 1)");
  const boost::math::chi_squared_distribution<double> dist(static_cast<double>(support_size));
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

double captured_fraction(const Eigen::MatrixXd& atoms, const Support& support, const Eigen::VectorXd& load_term) {
  const double total = load_term.squaredNorm();
  if (total == 0.0) return 0.0;
  const auto e = support_energy(atoms, support, load_term);
  if (!e) throw DegenerateSupportError("support " + to_string(support) + " has dependent columns");
  return std::clamp(*e / total, 0.0, 1.0);
}

}  // namespace gridshield
