#pragma once

#include <gridshield/types.hpp>

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>

namespace gridshield {

/// Relative threshold on the QR diagonal below which a column set counts as
/// rank deficient.
inline constexpr double kRankTolerance = 1e-8;

/// Orthogonal projector onto col(basis), built from a thin Householder QR.
class SubspaceProjector {
 public:
  /// Throws DegenerateSupportError when `basis` is empty or not of full column rank.
  explicit SubspaceProjector(Eigen::MatrixXd basis);

  const Eigen::MatrixXd& basis() const { return basis_; }
  /// P = B (B^T B)^{-1} B^T, assembled as Q Q^T.
  const Eigen::MatrixXd& matrix() const { return p_; }
  /// Orthonormal basis of the column space.
  const Eigen::MatrixXd& q() const { return q_; }
  Index rank() const { return basis_.cols(); }
  Index dim() const { return basis_.rows(); }

  /// ||P v||^2
  double energy(const Eigen::VectorXd& v) const;
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  /// Least-squares coefficients of v on the basis columns.
  Eigen::VectorXd coefficients(const Eigen::VectorXd& v) const;

 private:
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
  Eigen::MatrixXd p_;
};

SubspaceProjector projector(const Eigen::MatrixXd& h_sub);

/// ||P v||^2; throws DimensionError when v does not live in the projector's space.
double projection_energy(const SubspaceProjector& p, const Eigen::VectorXd& v);

/// argmin_c ||dz_L - H_sub c||^2, the ML attack values under Gaussian noise.
Eigen::VectorXd ml_attack_estimate(const Eigen::MatrixXd& h_sub, const Eigen::VectorXd& dz_L);

/// ||P_S v||^2 for the columns `support` of `atoms`, computed from a QR of the
/// selected columns without assembling P. Empty when the columns are degenerate.
std::optional<double> support_energy(const Eigen::MatrixXd& atoms, const Support& support, const Eigen::VectorXd& v);

/// (h_k^T v)^2 / ||h_k||^2 for every k in `ground`, in ground-set order.
/// Zero columns contribute 0.
Eigen::VectorXd single_node_energies(const Eigen::MatrixXd& atoms, const Support& ground, const Eigen::VectorXd& v);

/// Memoizes projectors per support for one dictionary. Entries are built outside
/// the lock and published whole, so readers never see a half-built projector.
/// Degenerate supports are remembered as null entries.
class ProjectorCache {
 public:
  explicit ProjectorCache(const Eigen::MatrixXd& atoms) : atoms_(&atoms) {}

  /// Returns nullptr when the support's columns are degenerate.
  std::shared_ptr<const SubspaceProjector> get(const Support& support);

  std::size_t size() const;

 private:
  const Eigen::MatrixXd* atoms_;
  mutable std::shared_mutex mutex_;
  std::map<Support, std::shared_ptr<const SubspaceProjector>> entries_;
};

}  // namespace gridshield
