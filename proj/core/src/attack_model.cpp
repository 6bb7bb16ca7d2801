#include <gridshield/attack_model.hpp>

#include <gridshield/errors.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>

namespace gridshield {

AttackSpec make_attack(const TopologyMatrix& topo, const Support& support, const Eigen::VectorXd& values) {
  if (values.size() != static_cast<Index>(support.size()))
    throw DimensionError("attack support and values differ in length");
  AttackSpec spec;
  spec.support = support;
  spec.values = values;
  spec.c = embed(support, values, topo.state_count());
  spec.a = topo.H() * spec.c;
  spec.norm_a = spec.a.norm();
  return spec;
}

AttackSpec sample_attack(const TopologyMatrix& topo, int k_a, double attack_norm, Rng& rng) {
  const auto& ground = topo.restricted_states();
  if (k_a < 0 || static_cast<std::size_t>(k_a) > ground.size())
    throw ConfigError("K_a = " + std::to_string(k_a) + " exceeds the " + std::to_string(ground.size()) +
                      " attackable states");
  if (!(attack_norm > 0.0)) throw ConfigError("attack norm must be positive");

  Support support;
  std::sample(ground.begin(), ground.end(), std::back_inserter(support), k_a, rng);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd values(k_a);
  for (Index i = 0; i < k_a; ++i) values(i) = unif(rng);

  const double raw = (topo.H() * embed(support, values, topo.state_count())).norm();
  if (raw > 0.0) values *= attack_norm / raw;
  auto spec = make_attack(topo, support, values);
  spec.norm_a = attack_norm;
  return spec;
}

Eigen::VectorXd simulate_load_change(const GridNetwork& net, const TopologyMatrix& topo,
                                     const Eigen::VectorXd& theta_t, double sigma_s2, Rng& rng) {
  if (sigma_s2 < 0.0) throw ConfigError("sigma_s2 must be non-negative");
  if (theta_t.size() != topo.state_count()) throw DimensionError("state vector length mismatch");
  if (sigma_s2 == 0.0) return theta_t;

  std::normal_distribution<double> phi(1.0, std::sqrt(sigma_s2));
  Eigen::VectorXd p(topo.state_count());
  for (Index j = 0; j < topo.state_count(); ++j) {
    const auto bus = net.index_of(topo.bus_of_column(j));
    p(j) = topo.H().row(static_cast<Index>(bus)).dot(theta_t);
  }
  // one factor per load bus, drawn in bus order
  for (Index j = 0; j < topo.state_count(); ++j) {
    const auto& bus = net.buses()[net.index_of(topo.bus_of_column(j))];
    if (bus.bus_class == BusClass::load) p(j) *= phi(rng);
  }
  return dc_power_flow(net, p);
}

Eigen::VectorXd base_state(const GridNetwork& net) { return dc_power_flow(net, base_injections(net)); }

Eigen::VectorXd difference_measurements(const Eigen::VectorXd& z_t, const Eigen::VectorXd& z_t1) {
  if (z_t.size() != z_t1.size())
    throw DimensionError("snapshots differ in length (" + std::to_string(z_t.size()) + " vs " +
                         std::to_string(z_t1.size()) + ")");
  return z_t1 - z_t;
}

Eigen::VectorXd gaussian_noise(Index m, double variance, Rng& rng) {
  Eigen::VectorXd e(m);
  if (variance <= 0.0) return e.setZero();
  std::normal_distribution<double> n(0.0, std::sqrt(variance));
  for (Index i = 0; i < m; ++i) e(i) = n(rng);
  return e;
}

AdaptiveMonitor::AdaptiveMonitor(const TopologyMatrix& topo, StateEstimator estimator, Identifier identifier,
                                 double gamma_bdd, Eigen::VectorXd z_secure)
    : topo_(&topo),
      estimator_(std::move(estimator)),
      identifier_(std::move(identifier)),
      gamma_bdd_(gamma_bdd),
      z_prev_(std::move(z_secure)) {
  if (z_prev_.size() != topo.measurement_count()) throw DimensionError("secure snapshot length mismatch");
  if (!identifier_) throw ConfigError("monitor needs an identifier");
}

StepOutcome AdaptiveMonitor::step(const Eigen::VectorXd& z_t1) {
  StepOutcome out;
  const auto dz = difference_measurements(z_prev_, z_t1);

  const auto bdd = bdd_test(estimator_, z_t1, gamma_bdd_);
  out.bdd_flag = bdd.verdict;
  out.bdd_statistic = bdd.statistic;

  const auto id = identifier_(topo_->load_part(dz));
  out.attack_detected = !id.support.empty();
  out.support = id.support;
  out.values = id.values;

  if (out.attack_detected) {
    const auto c_hat = embed(id.support, id.values, topo_->state_count());
    auto corrected = corrected_psse(estimator_, z_prev_, z_t1, c_hat);
    out.theta_hat = std::move(corrected.theta_t1);
    out.z_next = std::move(corrected.z_corrected);
  } else {
    out.theta_hat = estimator_.estimate(z_t1);
    out.z_next = z_t1;
  }
  z_prev_ = out.z_next;
  ++ticks_;
  return out;
}

}  // namespace gridshield
