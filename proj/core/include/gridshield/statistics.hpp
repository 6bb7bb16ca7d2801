#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace gridshield {

/// Detection threshold from null samples: the order statistic at position
/// ceil((1 - alpha) n) in ascending order, so that P(stat > threshold) <= alpha.
/// Throws ConfigError for an empty sample or alpha outside (0, 1).
double null_threshold(std::vector<double> samples, double alpha);

/// Linear-interpolated sample quantile, q in [0, 1].
double empirical_quantile(std::vector<double> samples, double q);

double mean(const std::vector<double>& x);
/// Unbiased sample variance; 0 for fewer than two samples.
double variance(const std::vector<double>& x);

/// Fractional ranks, ties share their average rank.
std::vector<double> average_ranks(const std::vector<double>& x);
/// Spearman rank correlation; NaN when either input is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// sup |F_emp - F| for a one-sample test against a continuous CDF.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> a, std::vector<double> b);

struct RocPoint {
  double threshold = 0.0;
  double p_fa = 0.0;
  double p_d = 0.0;
};

/// Sweeps the decision "stat > threshold" over every distinct recorded value
/// (plus -inf) in ascending order, so both rates are non-increasing.
std::vector<RocPoint> roc_curve(const std::vector<double>& null_stats, const std::vector<double>& alt_stats);

/// Highest detection rate among ROC points with p_fa <= target.
double pd_at_pfa(const std::vector<RocPoint>& roc, double target_pfa);

}  // namespace gridshield
