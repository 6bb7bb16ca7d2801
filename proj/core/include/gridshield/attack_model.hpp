#pragma once

#include <gridshield/estimation.hpp>
#include <gridshield/grid_model.hpp>
#include <gridshield/types.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>

namespace gridshield {

using Rng = std::mt19937_64;

/// Unobservable state attack c and its measurement image a = Hc.
struct AttackSpec {
  Support support;
  Eigen::VectorXd values;  // c on `support`
  Eigen::VectorXd c;       // full state length
  Eigen::VectorXd a;       // full measurement length
  double norm_a = 0.0;

  std::size_t k_a() const { return support.size(); }
};

struct ScenarioConfig {
  double sigma_s2 = 0.05;
  double sigma_e2 = 0.01;
  int k_a = 4;
  double attack_norm = 1.2;
  std::uint64_t seed = 0;
};

/// Support drawn uniformly among k_a-subsets of the restricted set, values
/// uniform on [-1, 1], rescaled so that ||Hc|| = attack_norm.
/// Throws ConfigError when k_a exceeds the restricted set or attack_norm <= 0.
AttackSpec sample_attack(const TopologyMatrix& topo, int k_a, double attack_norm, Rng& rng);

/// Attack with explicit support and values, no rescaling.
AttackSpec make_attack(const TopologyMatrix& topo, const Support& support, const Eigen::VectorXd& values);

/// Scales each load-bus injection by an independent N(1, sigma_s2) factor, lets
/// the slack absorb the imbalance and re-solves the DC power flow.
Eigen::VectorXd simulate_load_change(const GridNetwork& net, const TopologyMatrix& topo,
                                     const Eigen::VectorXd& theta_t, double sigma_s2, Rng& rng);

/// Angles of the case's scheduled operating point.
Eigen::VectorXd base_state(const GridNetwork& net);

Eigen::VectorXd difference_measurements(const Eigen::VectorXd& z_t, const Eigen::VectorXd& z_t1);

/// i.i.d. N(0, variance) vector.
Eigen::VectorXd gaussian_noise(Index m, double variance, Rng& rng);

/// Runs an identifier on dz restricted to the load rows.
using Identifier = std::function<IdentificationResult(const Eigen::VectorXd& dz_L)>;

struct StepOutcome {
  bool bdd_flag = false;
  double bdd_statistic = 0.0;
  bool attack_detected = false;
  Support support;
  Eigen::VectorXd values;
  Eigen::VectorXd theta_hat;  // estimate at the new tick, after correction
  Eigen::VectorXd z_next;     // snapshot stored for the next tick
};

/// Difference-based monitor. Keeps the last (corrected) snapshot, compares each
/// incoming snapshot against it, and removes identified attacks before storing.
/// Single stream, not thread-safe.
class AdaptiveMonitor {
 public:
  /// `z_secure` is the trusted initial snapshot; no attack is assumed on it.
  AdaptiveMonitor(const TopologyMatrix& topo, StateEstimator estimator, Identifier identifier, double gamma_bdd,
                  Eigen::VectorXd z_secure);

  StepOutcome step(const Eigen::VectorXd& z_t1);

  const Eigen::VectorXd& snapshot() const { return z_prev_; }
  std::size_t ticks() const { return ticks_; }

 private:
  const TopologyMatrix* topo_;
  StateEstimator estimator_;
  Identifier identifier_;
  double gamma_bdd_;
  Eigen::VectorXd z_prev_;
  std::size_t ticks_ = 0;
};

}  // namespace gridshield
