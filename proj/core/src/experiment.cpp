#include <gridshield/experiment.hpp>

#include <gridshield/analysis.hpp>
#include <gridshield/errors.hpp>
#include <gridshield/gmgic.hpp>
#include <gridshield/omp.hpp>
#include <gridshield/statistics.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace gridshield {

namespace {

/// Runs fn(i) for i in [0, n) on `threads` workers. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

bool same(double a, double b) { return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::gic: return "gic";
    case Method::omp: return "omp";
    case Method::gmgic: return "gmgic";
    case Method::eng: return "eng";
    case Method::bdd: return "bdd";
    case Method::oracle_gic: return "oracle-gic";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  if (s == "gic") return Method::gic;
  if (s == "omp") return Method::omp;
  if (s == "gmgic" || s == "gm-gic") return Method::gmgic;
  if (s == "eng") return Method::eng;
  if (s == "bdd") return Method::bdd;
  if (s == "oracle-gic" || s == "oracle_gic") return Method::oracle_gic;
  throw ConfigError("unknown method '" + std::string(s) + "'");
}

std::vector<ScenarioPoint> ExperimentSpec::grid() const {
  if (k_a.empty() || attack_norm.empty() || sigma_s2.empty() || sigma_e2.empty())
    throw ConfigError("scenario grid is empty");
  std::vector<std::optional<double>> etas;
  if (eta.empty())
    etas.emplace_back(std::nullopt);
  else
    for (double e : eta) etas.emplace_back(e);

  std::vector<ScenarioPoint> out;
  for (int k : k_a)
    for (double a : attack_norm)
      for (double s : sigma_s2)
        for (double e : sigma_e2)
          for (const auto& h : etas)
            out.push_back(ScenarioPoint{k, attack_norm_per_node ? a * k : a, s, e, h});
  return out;
}

void ExperimentSpec::validate() const {
  if (methods.empty()) throw ConfigError("no methods requested");
  if (n_trials < 1) throw ConfigError("n_trials must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (k_c < 1 || k_c_global < 1) throw ConfigError("K_c must be at least 1");
  if (zeta < 0.0) throw ConfigError("zeta must be non-negative");
  for (const auto& p : grid()) {
    if (p.k_a < 0) throw ConfigError("K_a must be non-negative");
    if (p.k_a > 0 && !(p.attack_norm > 0.0)) throw ConfigError("attack norm must be positive");
    if (p.sigma_s2 < 0.0) throw ConfigError("sigma_s2 must be non-negative");
    if (!(p.sigma_e2 > 0.0)) throw ConfigError("sigma_e2 must be positive");
    if (p.eta && *p.eta < 0.0) throw ConfigError("eta must be non-negative");
  }
}

const ThresholdPoint& Thresholds::at(double sigma_s2, double sigma_e2) const {
  for (const auto& p : points)
    if (same(p.sigma_s2, sigma_s2) && same(p.sigma_e2, sigma_e2)) return p;
  throw ConfigError("no thresholds calibrated for sigma_s2 = " + std::to_string(sigma_s2) +
                    ", sigma_e2 = " + std::to_string(sigma_e2));
}

Workbench::Workbench(GridNetwork network, const std::optional<std::vector<int>>& restricted_buses)
    : net(std::move(network)), topo(build_topology(net, restricted_buses)), theta_base(base_state(net)) {}

Rng trial_rng(std::uint64_t seed, std::uint64_t trial, Stream stream, std::uint64_t component) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(trial), hi(trial), lo(static_cast<std::uint64_t>(stream)),
                    lo(component)};
  return Rng(seq);
}

TrialData simulate_trial(const Workbench& wb, const ScenarioPoint& point, bool attacked, std::uint64_t seed,
                         std::uint64_t trial, Stream stream) {
  const auto& topo = wb.topo;
  TrialData d;
  d.theta_t = wb.theta_base;

  auto load_rng = trial_rng(seed, trial, stream, 0);
  d.theta_t1 = simulate_load_change(wb.net, topo, d.theta_t, point.sigma_s2, load_rng);
  Eigen::VectorXd dtheta = d.theta_t1 - d.theta_t;
  d.load_term = topo.load_block() * dtheta;
  if (point.eta) {
    const double current = d.load_term.squaredNorm();
    if (current > 0.0) {
      const double scale = std::sqrt(*point.eta / current);
      dtheta *= scale;
      d.load_term *= scale;
      d.theta_t1 = d.theta_t + dtheta;
    }
  }
  d.eta = d.load_term.squaredNorm();

  if (attacked && point.k_a > 0) {
    auto attack_rng = trial_rng(seed, trial, stream, 1);
    d.attack = sample_attack(topo, point.k_a, point.attack_norm, attack_rng);
  } else {
    d.attack = make_attack(topo, {}, Eigen::VectorXd());
  }

  auto noise_rng = trial_rng(seed, trial, stream, 2);
  const auto m = topo.measurement_count();
  const Eigen::VectorXd e_t = gaussian_noise(m, point.sigma_e2 / 2.0, noise_rng);
  const Eigen::VectorXd e_t1 = gaussian_noise(m, point.sigma_e2 / 2.0, noise_rng);
  d.z_t = topo.H() * d.theta_t + e_t;
  d.z_t1 = topo.H() * d.theta_t1 + d.attack.a + e_t1;
  d.dz = difference_measurements(d.z_t, d.z_t1);
  d.dz_L = topo.load_part(d.dz);
  return d;
}

double f_score(const Support& truth, const Support& estimate) {
  const auto t = normalized(truth);
  const auto e = normalized(estimate);
  if (t.empty() && e.empty()) return 1.0;
  Support common;
  std::set_intersection(t.begin(), t.end(), e.begin(), e.end(), std::back_inserter(common));
  const double tp = static_cast<double>(common.size());
  const double fn = static_cast<double>(t.size()) - tp;
  const double fp = static_cast<double>(e.size()) - tp;
  return 2.0 * tp / (2.0 * tp + fn + fp);
}

bool eng_detector(const Eigen::VectorXd& dz, double gamma) { return dz.squaredNorm() > gamma; }

MethodContext::MethodContext(const Workbench& workbench, int k_c_, int k_c_global_, double zeta_)
    : wb(&workbench),
      family(workbench.topo.restricted_states(), k_c_),
      estimator(workbench.topo.H(), Eigen::VectorXd::Ones(workbench.topo.measurement_count())),
      k_c(k_c_),
      k_c_global(k_c_global_),
      zeta(zeta_) {}

MethodOutcome run_method(Method m, const MethodContext& ctx, const TrialData& data, const ScenarioPoint& point,
                         const ThresholdPoint& th) {
  using clock = std::chrono::steady_clock;
  const auto& topo = ctx.wb->topo;
  MethodOutcome out;
  const auto start = clock::now();
  switch (m) {
    case Method::gic:
      out.result = gic_select(topo.load_block(), data.dz_L, ctx.family, PenaltyConfig{ctx.zeta, th.gamma_gic},
                              point.sigma_e2);
      break;
    case Method::oracle_gic:
      out.result = oracle_gic_select(topo.load_block(), data.dz_L, ctx.family,
                                     PenaltyConfig{ctx.zeta, th.gamma_oracle_gic}, data.load_term, point.sigma_e2);
      break;
    case Method::omp:
      out.result = omp_identify(topo.load_block(), topo.restricted_states(), data.dz_L, OmpConfig{ctx.k_c, th.gamma_omp});
      break;
    case Method::gmgic: {
      GmGicConfig cfg;
      cfg.k_c_subset = ctx.k_c;
      cfg.k_c_global = ctx.k_c_global;
      cfg.rho = th.rho;
      cfg.zeta = ctx.zeta;
      out.result = gm_gic(topo.dictionary(), data.dz_L, cfg, point.sigma_e2);
      break;
    }
    case Method::eng:
      out.result.detection_statistic = data.dz.squaredNorm();
      out.result.attack_detected = out.result.detection_statistic > th.gamma_eng;
      break;
    case Method::bdd:
      out.result.detection_statistic = ctx.estimator.bdd_statistic(data.dz);
      out.result.attack_detected = out.result.detection_statistic > th.gamma_bdd;
      break;
  }
  out.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
  out.statistic = out.result.detection_statistic;
  out.verdict = out.result.attack_detected;
  return out;
}

Thresholds calibrate_thresholds(const ExperimentSpec& spec, const Workbench& wb) {
  if (spec.n_null < 100) throw ConfigError("at least 100 null runs are needed for calibration (got " +
                                           std::to_string(spec.n_null) + ")");
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");

  std::vector<std::pair<double, double>> settings;
  for (const auto& p : spec.grid()) {
    const bool known = std::any_of(settings.begin(), settings.end(), [&](const auto& s) {
      return same(s.first, p.sigma_s2) && same(s.second, p.sigma_e2);
    });
    if (!known) settings.emplace_back(p.sigma_s2, p.sigma_e2);
  }

  const MethodContext ctx(wb, spec.k_c, spec.k_c_global, spec.zeta);
  const auto& atoms = wb.topo.load_block();
  const auto& ground = wb.topo.restricted_states();

  Thresholds out;
  out.alpha = spec.alpha;
  out.n_null = spec.n_null;
  out.seed = spec.seed;
  out.zeta = spec.zeta;
  out.k_c = spec.k_c;
  for (const auto& [s2, e2] : settings) {
    const ScenarioPoint point{0, 0.0, s2, e2, std::nullopt};
    std::vector<double> bdd(spec.n_null), eng(spec.n_null), gic(spec.n_null), single(spec.n_null),
        oracle(spec.n_null);
    parallel_for(spec.n_null, spec.threads, [&](std::size_t i) {
      const auto d = simulate_trial(wb, point, false, spec.seed, i, Stream::calibration);
      bdd[i] = ctx.estimator.bdd_statistic(d.dz);
      eng[i] = d.dz.squaredNorm();
      gic[i] = gic_null_statistic(atoms, d.dz_L, ctx.family, spec.zeta, e2);
      single[i] = omp_null_statistic(atoms, ground, d.dz_L);
      oracle[i] = gic_null_statistic(atoms, d.dz_L - d.load_term, ctx.family, spec.zeta, e2);
    });
    ThresholdPoint tp;
    tp.sigma_s2 = s2;
    tp.sigma_e2 = e2;
    tp.gamma_bdd = null_threshold(bdd, spec.alpha);
    tp.gamma_eng = null_threshold(eng, spec.alpha);
    tp.gamma_gic = null_threshold(gic, spec.alpha);
    tp.gamma_omp = null_threshold(single, spec.alpha);
    tp.rho = tp.gamma_omp;
    tp.gamma_oracle_gic = null_threshold(oracle, spec.alpha);
    out.points.push_back(tp);
  }
  return out;
}

ResultTable run_experiment(const ExperimentSpec& spec, const Workbench& wb, const Thresholds& thresholds) {
  spec.validate();
  ResultTable table;
  table.spec = spec;
  table.thresholds = thresholds;
  table.points = spec.grid();

  const MethodContext ctx(wb, spec.k_c, spec.k_c_global, spec.zeta);
  const std::size_t per_point = spec.n_trials * (spec.null_trials ? 2 : 1);
  const std::size_t n_tasks = table.points.size() * per_point;
  std::vector<std::vector<TrialRecord>> slots(n_tasks);

  parallel_for(n_tasks, spec.threads, [&](std::size_t task) {
    const std::size_t p = task / per_point;
    const std::size_t local = task % per_point;
    const bool attacked = local < spec.n_trials;
    const std::uint64_t trial = attacked ? local : local - spec.n_trials;
    const auto& point = table.points[p];
    auto& out = slots[task];

    TrialData data;
    std::string sim_error;
    try {
      data = simulate_trial(wb, point, attacked, spec.seed, trial, attacked ? Stream::trial : Stream::null_trial);
    } catch (const std::exception& e) {
      sim_error = e.what();
    }
    const auto& th = thresholds.at(point.sigma_s2, point.sigma_e2);

    for (auto m : spec.methods) {
      TrialRecord rec;
      rec.point = p;
      rec.method = m;
      rec.trial = trial;
      rec.attacked = attacked;
      if (!sim_error.empty()) {
        rec.error = sim_error;
        out.push_back(std::move(rec));
        continue;
      }
      rec.true_buses = wb.topo.buses_of(data.attack.support);
      rec.eta = data.eta;
      try {
        const auto o = run_method(m, ctx, data, point, th);
        rec.selected_buses = wb.topo.buses_of(o.result.support);
        rec.verdict = o.verdict;
        rec.statistic = o.statistic;
        rec.wall_ns = o.wall_ns;
        rec.f_score = f_score(data.attack.support, o.result.support);
        const auto c_hat = embed(o.result.support, o.result.values, wb.topo.state_count());
        const auto est = corrected_psse(ctx.estimator, data.z_t, data.z_t1, c_hat);
        rec.mse = (est.theta_t1 - data.theta_t1).squaredNorm() / static_cast<double>(data.theta_t1.size());
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      out.push_back(std::move(rec));
    }
  });

  for (auto& s : slots)
    for (auto& r : s) table.records.push_back(std::move(r));
  table.aggregates = aggregate(spec, table.points, table.records);
  return table;
}

ResultTable run_experiment(const ExperimentSpec& spec, const Workbench& wb) {
  spec.validate();
  return run_experiment(spec, wb, calibrate_thresholds(spec, wb));
}

std::vector<Aggregate> aggregate(const ExperimentSpec& spec, const std::vector<ScenarioPoint>& points,
                                 const std::vector<TrialRecord>& records) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Aggregate> out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (auto m : spec.methods) {
      Aggregate a;
      a.point = p;
      a.method = m;
      a.scenario = points[p];
      std::vector<double> alt_stats, null_stats, fs, mse, times, etas;
      double detected = 0.0, alarms = 0.0;
      for (const auto& r : records) {
        if (r.point != p || r.method != m) continue;
        if (!r.error.empty()) {
          ++a.n_errors;
          continue;
        }
        times.push_back(static_cast<double>(r.wall_ns));
        if (r.attacked) {
          alt_stats.push_back(r.statistic);
          fs.push_back(r.f_score);
          mse.push_back(r.mse);
          etas.push_back(r.eta);
          detected += r.verdict ? 1.0 : 0.0;
        } else {
          null_stats.push_back(r.statistic);
          alarms += r.verdict ? 1.0 : 0.0;
        }
      }
      a.n_trials = alt_stats.size();
      a.detection_rate = alt_stats.empty() ? nan : detected / static_cast<double>(alt_stats.size());
      a.false_alarm_rate = null_stats.empty() ? nan : alarms / static_cast<double>(null_stats.size());
      a.pd_at_alpha =
          null_stats.empty() || alt_stats.empty() ? nan : pd_at_pfa(roc_curve(null_stats, alt_stats), spec.alpha);
      a.mean_f_score = fs.empty() ? nan : mean(fs);
      a.f_score_se = fs.size() < 2 ? nan : std::sqrt(variance(fs) / static_cast<double>(fs.size()));
      a.mean_mse = mse.empty() ? nan : mean(mse);
      a.median_runtime_ns = times.empty() ? nan : empirical_quantile(times, 0.5);
      a.mean_eta = etas.empty() ? nan : mean(etas);
      out.push_back(a);
    }
  }
  return out;
}

}  // namespace gridshield
