#pragma once

#include <gridshield/types.hpp>

#include <Eigen/Dense>

#include <optional>

namespace gridshield {

/// Gaussian meter noise. `sigma_e2` is the per-element variance of the
/// difference noise, so each snapshot carries half of it.
struct NoiseModel {
  double sigma_e2 = 0.01;
  Eigen::VectorXd r_diag;  // single-snapshot covariance diagonal

  /// Isotropic model over `m` meters; throws ConfigError unless sigma_e2 > 0.
  static NoiseModel isotropic(double sigma_e2, Index m);
};

/// WLS estimator for a fixed H and diagonal R, factorized once.
/// K = (H^T R^-1 H)^-1 H^T R^-1 is assembled from a QR of R^{-1/2} H.
class StateEstimator {
 public:
  /// Throws StructuralError when H is rank deficient and ConfigError for a
  /// non-positive covariance entry.
  StateEstimator(Eigen::MatrixXd h, Eigen::VectorXd r_diag);

  const Eigen::MatrixXd& H() const { return h_; }
  const Eigen::MatrixXd& K() const { return k_; }
  const Eigen::VectorXd& r_diag() const { return r_diag_; }

  Eigen::VectorXd estimate(const Eigen::VectorXd& z) const;
  Eigen::VectorXd residual(const Eigen::VectorXd& z) const;
  /// ||z - H theta_hat||^2
  double bdd_statistic(const Eigen::VectorXd& z) const;

 private:
  void check(const Eigen::VectorXd& z) const;

  Eigen::MatrixXd h_;
  Eigen::VectorXd r_diag_;
  Eigen::MatrixXd k_;
};

Eigen::VectorXd wls_psse(const Eigen::MatrixXd& h, const Eigen::VectorXd& r_diag, const Eigen::VectorXd& z);

struct BddResult {
  double statistic = 0.0;
  bool verdict = false;
};

/// J(x) residual test. Throws DomainError for a negative threshold.
BddResult bdd_test(const StateEstimator& est, const Eigen::VectorXd& z, double gamma_bdd);
BddResult bdd_test(const Eigen::MatrixXd& h, const Eigen::VectorXd& r_diag, const Eigen::VectorXd& z,
                   double gamma_bdd);

struct PsseResult {
  Eigen::VectorXd theta_hat;
  Eigen::VectorXd residual;
  double bdd_statistic = 0.0;
  std::optional<Eigen::VectorXd> corrected_z;
};

struct CorrectedPsse {
  Eigen::VectorXd theta_t;
  Eigen::VectorXd theta_t1;
  Eigen::VectorXd z_corrected;
};

/// Removes the estimated state attack `c_hat` (full state length, zero off the
/// support) from z_{t+1} before estimating. An all-zero `c_hat` is the null
/// decision and leaves z_{t+1} untouched.
CorrectedPsse corrected_psse(const StateEstimator& est, const Eigen::VectorXd& z_t, const Eigen::VectorXd& z_t1,
                             const Eigen::VectorXd& c_hat);
CorrectedPsse corrected_psse(const Eigen::MatrixXd& h, const Eigen::VectorXd& r_diag, const Eigen::VectorXd& z_t,
                             const Eigen::VectorXd& z_t1, const Eigen::VectorXd& c_hat);

/// Full PSSE report for one snapshot.
PsseResult run_psse(const StateEstimator& est, const Eigen::VectorXd& z);

}  // namespace gridshield
