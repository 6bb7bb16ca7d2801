#include <gridshield/projection.hpp>

#include <gridshield/errors.hpp>

namespace gridshield {

SubspaceProjector::SubspaceProjector(Eigen::MatrixXd basis) : basis_(std::move(basis)) {
  const auto m = basis_.rows();
  const auto k = basis_.cols();
  if (k == 0) throw DegenerateSupportError("empty column set");
  if (k > m) throw DegenerateSupportError("more columns than rows");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis_);
  r_ = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Eigen::VectorXd diag = r_.diagonal().cwiseAbs();
  if (diag.minCoeff() <= kRankTolerance * diag.maxCoeff() || diag.maxCoeff() == 0.0)
    throw DegenerateSupportError("column set is rank deficient");
  q_ = qr.householderQ() * Eigen::MatrixXd::Identity(m, k);
  p_ = q_ * q_.transpose();
}

double SubspaceProjector::energy(const Eigen::VectorXd& v) const { return (q_.transpose() * v).squaredNorm(); }

Eigen::VectorXd SubspaceProjector::project(const Eigen::VectorXd& v) const { return q_ * (q_.transpose() * v); }

Eigen::VectorXd SubspaceProjector::coefficients(const Eigen::VectorXd& v) const {
  return r_.triangularView<Eigen::Upper>().solve(q_.transpose() * v);
}

SubspaceProjector projector(const Eigen::MatrixXd& h_sub) { return SubspaceProjector(h_sub); }

double projection_energy(const SubspaceProjector& p, const Eigen::VectorXd& v) {
  if (v.size() != p.dim())
    throw DimensionError("vector of length " + std::to_string(v.size()) + " projected in a space of dimension " +
                         std::to_string(p.dim()));
  return p.energy(v);
}

Eigen::VectorXd ml_attack_estimate(const Eigen::MatrixXd& h_sub, const Eigen::VectorXd& dz_L) {
  if (dz_L.size() != h_sub.rows())
    throw DimensionError("measurement length " + std::to_string(dz_L.size()) + " does not match dictionary rows " +
                         std::to_string(h_sub.rows()));
  return SubspaceProjector(h_sub).coefficients(dz_L);
}

std::optional<double> support_energy(const Eigen::MatrixXd& atoms, const Support& support, const Eigen::VectorXd& v) {
  if (v.size() != atoms.rows())
    throw DimensionError("vector of length " + std::to_string(v.size()) + " does not match dictionary rows " +
                         std::to_string(atoms.rows()));
  const auto k = static_cast<Index>(support.size());
  if (k == 0) return 0.0;
  if (k > atoms.rows()) return std::nullopt;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(select_columns(atoms, support));
  const auto diag = qr.matrixQR().diagonal().head(k).cwiseAbs();
  const double top = diag.maxCoeff();
  if (top == 0.0 || diag.minCoeff() <= kRankTolerance * top) return std::nullopt;
  const Eigen::VectorXd qtv = qr.householderQ().adjoint() * v;
  return qtv.head(k).squaredNorm();
}

Eigen::VectorXd single_node_energies(const Eigen::MatrixXd& atoms, const Support& ground, const Eigen::VectorXd& v) {
  if (v.size() != atoms.rows())
    throw DimensionError("vector of length " + std::to_string(v.size()) + " does not match dictionary rows " +
                         std::to_string(atoms.rows()));
  Eigen::VectorXd e(static_cast<Index>(ground.size()));
  for (std::size_t i = 0; i < ground.size(); ++i) {
    const auto col = atoms.col(ground[i]);
    const double nn = col.squaredNorm();
    const double ip = col.dot(v);
    e(static_cast<Index>(i)) = nn > 0.0 ? ip * ip / nn : 0.0;
  }
  return e;
}

std::shared_ptr<const SubspaceProjector> ProjectorCache::get(const Support& support) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(support); it != entries_.end()) return it->second;
  }
  std::shared_ptr<const SubspaceProjector> built;
  try {
    built = std::make_shared<const SubspaceProjector>(select_columns(*atoms_, support));
  } catch (const DegenerateSupportError&) {
    built = nullptr;
  }
  std::unique_lock lock(mutex_);
  return entries_.try_emplace(support, std::move(built)).first->second;
}

std::size_t ProjectorCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace gridshield
