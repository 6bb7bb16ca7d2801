#include <gridshield/gic.hpp>

#include <gridshield/errors.hpp>

#include <cmath>
#include <limits>

namespace gridshield {

namespace {

void check_sigma(double sigma_e2) {
  if (!(sigma_e2 > 0.0)) throw DomainError("sigma_e2 must be positive");
}

}  // namespace

CandidateFamily::CandidateFamily(const Support& ground, int k_c, std::size_t max_size)
    : ground_(normalized(ground)), k_c_(k_c) {
  if (k_c < 1) throw ConfigError("K_c must be at least 1");
  const auto n = ground_.size();
  const auto top = std::min<std::size_t>(static_cast<std::size_t>(k_c), n);

  double total = 0.0;
  double binom = 1.0;
  for (std::size_t k = 1; k <= top; ++k) {
    binom = binom * static_cast<double>(n - k + 1) / static_cast<double>(k);
    total += binom;
  }
  if (total > static_cast<double>(max_size))
    throw ConfigError("candidate family of " + std::to_string(static_cast<long long>(total)) +
                      " supports exceeds the limit of " + std::to_string(max_size));
  supports_.reserve(static_cast<std::size_t>(total));

  std::vector<std::size_t> pos;
  for (std::size_t k = 1; k <= top; ++k) {
    pos.resize(k);
    for (std::size_t i = 0; i < k; ++i) pos[i] = i;
    while (true) {
      Support s(k);
      for (std::size_t i = 0; i < k; ++i) s[i] = ground_[pos[i]];
      supports_.push_back(std::move(s));
      std::size_t i = k;
      while (i > 0 && pos[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++pos[i - 1];
      for (std::size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
    }
  }
}

double gic_statistic(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L, const Support& support,
                     const PenaltyConfig& penalty, double sigma_e2) {
  check_sigma(sigma_e2);
  if (support.empty()) return penalty.gamma_gic;
  const auto e = support_energy(atoms, support, dz_L);
  if (!e) throw DegenerateSupportError("support " + to_string(support) + " has dependent columns");
  return *e / sigma_e2 - penalty.zeta * static_cast<double>(support.size());
}

double gic_statistic(const TopologyMatrix& topo, const Eigen::VectorXd& dz_L, const Support& support,
                     const PenaltyConfig& penalty, double sigma_e2) {
  return gic_statistic(topo.load_block(), dz_L, support, penalty, sigma_e2);
}

IdentificationResult gic_select(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L,
                                const CandidateFamily& family, const PenaltyConfig& penalty, double sigma_e2) {
  check_sigma(sigma_e2);
  if (family.size() == 0) throw ConfigError("empty candidate family");
  IdentificationResult out;
  out.scores.reserve(family.size() + 1);
  out.scores.push_back(CandidateScore{{}, penalty.gamma_gic});

  double best = penalty.gamma_gic;
  std::size_t best_at = 0;
  double best_alt = -std::numeric_limits<double>::infinity();
  for (const auto& s : family.supports()) {
    const auto e = support_energy(atoms, s, dz_L);
    double score = -std::numeric_limits<double>::infinity();
    if (e) {
      score = *e / sigma_e2 - penalty.zeta * static_cast<double>(s.size());
      best_alt = std::max(best_alt, score);
    } else {
      out.skipped.push_back(s);
    }
    out.scores.push_back(CandidateScore{s, score});
    if (score > best) {
      best = score;
      best_at = out.scores.size() - 1;
    }
  }

  out.support = out.scores[best_at].support;
  out.attack_detected = !out.support.empty();
  out.detection_statistic = best_alt;
  out.values = out.support.empty() ? Eigen::VectorXd() : ml_attack_estimate(select_columns(atoms, out.support), dz_L);
  return out;
}

IdentificationResult gic_select(const TopologyMatrix& topo, const Eigen::VectorXd& dz_L,
                                const CandidateFamily& family, const PenaltyConfig& penalty, double sigma_e2) {
  return gic_select(topo.load_block(), dz_L, family, penalty, sigma_e2);
}

bool detect_from_selection(const IdentificationResult& result) { return !result.support.empty(); }

double gic_null_statistic(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& dz_L, const CandidateFamily& family,
                          double zeta, double sigma_e2) {
  check_sigma(sigma_e2);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : family.supports())
    if (const auto e = support_energy(atoms, s, dz_L))
      best = std::max(best, *e / sigma_e2 - zeta * static_cast<double>(s.size()));
  return best;
}

}  // namespace gridshield
