#include <gridshield/statistics.hpp>

#include <gridshield/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gridshield {

double null_threshold(std::vector<double> samples, double alpha) {
  if (samples.empty()) throw ConfigError("no null samples");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  auto k = static_cast<long long>(std::ceil((1.0 - alpha) * n - 1e-9)) - 1;
  k = std::clamp<long long>(k, 0, static_cast<long long>(samples.size()) - 1);
  return samples[static_cast<std::size_t>(k)];
}

double empirical_quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw ConfigError("no samples");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  std::sort(samples.begin(), samples.end());
  const double pos = q * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, samples.size() - 1);
  return samples[lo] + (pos - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

double mean(const std::vector<double>& x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("spearman inputs differ in length");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ConfigError("no samples");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("no samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

std::vector<RocPoint> roc_curve(const std::vector<double>& null_stats, const std::vector<double>& alt_stats) {
  if (null_stats.empty() || alt_stats.empty()) throw ConfigError("ROC needs null and alternative samples");
  std::vector<double> cuts(null_stats);
  cuts.insert(cuts.end(), alt_stats.begin(), alt_stats.end());
  cuts.push_back(-std::numeric_limits<double>::infinity());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> n0(null_stats), n1(alt_stats);
  std::sort(n0.begin(), n0.end());
  std::sort(n1.begin(), n1.end());
  auto above = [](const std::vector<double>& v, double t) {
    return static_cast<double>(v.end() - std::upper_bound(v.begin(), v.end(), t)) / static_cast<double>(v.size());
  };
  std::vector<RocPoint> roc;
  roc.reserve(cuts.size());
  for (double t : cuts) roc.push_back(RocPoint{t, above(n0, t), above(n1, t)});
  return roc;
}

double pd_at_pfa(const std::vector<RocPoint>& roc, double target_pfa) {
  double best = 0.0;
  for (const auto& p : roc)
    if (p.p_fa <= target_pfa + 1e-12) best = std::max(best, p.p_d);
  return best;
}

}  // namespace gridshield
