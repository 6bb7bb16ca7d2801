#include <gridshield/estimation.hpp>

#include <gridshield/errors.hpp>

namespace gridshield {

NoiseModel NoiseModel::isotropic(double sigma_e2, Index m) {
  if (!(sigma_e2 > 0.0)) throw ConfigError("sigma_e2 must be positive");
  return NoiseModel{sigma_e2, Eigen::VectorXd::Constant(m, sigma_e2 / 2.0)};
}

StateEstimator::StateEstimator(Eigen::MatrixXd h, Eigen::VectorXd r_diag) : h_(std::move(h)), r_diag_(std::move(r_diag)) {
  if (r_diag_.size() != h_.rows())
    throw DimensionError("covariance has " + std::to_string(r_diag_.size()) + " entries for " +
                         std::to_string(h_.rows()) + " measurements");
  if (r_diag_.size() > 0 && !(r_diag_.minCoeff() > 0.0)) throw ConfigError("covariance entries must be positive");

  const Eigen::VectorXd w = r_diag_.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd a = w.asDiagonal() * h_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() != h_.cols()) throw StructuralError("measurement matrix is rank deficient");
  // K = A^+ W
  const Eigen::MatrixXd pinv = qr.solve(Eigen::MatrixXd::Identity(a.rows(), a.rows()));
  k_ = pinv * w.asDiagonal();
}

void StateEstimator::check(const Eigen::VectorXd& z) const {
  if (z.size() != h_.rows())
    throw DimensionError("measurement vector has " + std::to_string(z.size()) + " entries, expected " +
                         std::to_string(h_.rows()));
}

Eigen::VectorXd StateEstimator::estimate(const Eigen::VectorXd& z) const {
  check(z);
  return k_ * z;
}

Eigen::VectorXd StateEstimator::residual(const Eigen::VectorXd& z) const { return z - h_ * estimate(z); }

double StateEstimator::bdd_statistic(const Eigen::VectorXd& z) const { return residual(z).squaredNorm(); }

Eigen::VectorXd wls_psse(const Eigen::MatrixXd& h, const Eigen::VectorXd& r_diag, const Eigen::VectorXd& z) {
  return StateEstimator(h, r_diag).estimate(z);
}

BddResult bdd_test(const StateEstimator& est, const Eigen::VectorXd& z, double gamma_bdd) {
  if (gamma_bdd < 0.0) throw DomainError("BDD threshold must be non-negative");
  const double t = est.bdd_statistic(z);
  return BddResult{t, t > gamma_bdd};
}

BddResult bdd_test(const Eigen::MatrixXd& h, const Eigen::VectorXd& r_diag, const Eigen::VectorXd& z,
                   double gamma_bdd) {
  return bdd_test(StateEstimator(h, r_diag), z, gamma_bdd);
}

CorrectedPsse corrected_psse(const StateEstimator& est, const Eigen::VectorXd& z_t, const Eigen::VectorXd& z_t1,
                             const Eigen::VectorXd& c_hat) {
  if (c_hat.size() != est.H().cols())
    throw DimensionError("attack estimate has " + std::to_string(c_hat.size()) + " entries, expected " +
                         std::to_string(est.H().cols()));
  CorrectedPsse out;
  out.theta_t = est.estimate(z_t);
  if (c_hat.isZero(0.0)) {
    out.theta_t1 = est.estimate(z_t1);
    out.z_corrected = z_t1;
    return out;
  }
  const Eigen::VectorXd cleaned = z_t1 - est.H() * c_hat;
  out.theta_t1 = est.estimate(cleaned);
  out.z_corrected = est.H() * out.theta_t1;
  return out;
}

CorrectedPsse corrected_psse(const Eigen::MatrixXd& h, const Eigen::VectorXd& r_diag, const Eigen::VectorXd& z_t,
                             const Eigen::VectorXd& z_t1, const Eigen::VectorXd& c_hat) {
  return corrected_psse(StateEstimator(h, r_diag), z_t, z_t1, c_hat);
}

PsseResult run_psse(const StateEstimator& est, const Eigen::VectorXd& z) {
  PsseResult out;
  out.theta_hat = est.estimate(z);
  out.residual = z - est.H() * out.theta_hat;
  out.bdd_statistic = out.residual.squaredNorm();
  return out;
}

}  // namespace gridshield
