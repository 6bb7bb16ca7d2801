#include "fixtures.hpp"

#include <gridshield/errors.hpp>
#include <gridshield/experiment.hpp>

#include <json.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

using namespace gridshield;
using gridshield::testing::ieee30;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.methods = {Method::gic, Method::omp, Method::gmgic, Method::bdd, Method::eng};
  s.k_a = {2};
  s.attack_norm = {1.2};
  s.n_trials = 20;
  s.n_null = 100;
  s.seed = 99;
  return s;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gridshield_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(FScore, Examples) {
  EXPECT_NEAR(f_score({1, 2, 3}, {2, 3, 4}), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(f_score({1, 2}, {2, 1}), 1.0);
  EXPECT_EQ(f_score({1, 2}, {3}), 0.0);
  EXPECT_EQ(f_score({}, {}), 1.0);
  EXPECT_EQ(f_score({1}, {}), 0.0);
}

TEST(EngDetector, ZeroDifference) {
  const Eigen::VectorXd dz = Eigen::VectorXd::Zero(71);
  EXPECT_FALSE(eng_detector(dz, 0.0));
  EXPECT_TRUE(eng_detector(Eigen::VectorXd::Constant(4, 0.5), 0.99));
}

TEST(MethodNames, RoundTrip) {
  for (Method m : {Method::gic, Method::omp, Method::gmgic, Method::eng, Method::bdd, Method::oracle_gic})
    EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_EQ(method_from_string("oracle_gic"), Method::oracle_gic);
  EXPECT_THROW(method_from_string("lasso"), ConfigError);
  EXPECT_THROW(format_from_string("xml"), ConfigError);
}

TEST(SpecJson, ParsesAndRejects) {
  const auto s = spec_from_json(R"({"methods": ["gic", "bdd"], "k_a": [1, 2], "sigma_e2": 0.02, "seed": 5})");
  EXPECT_EQ(s.methods, (std::vector<Method>{Method::gic, Method::bdd}));
  EXPECT_EQ(s.k_a, (std::vector<int>{1, 2}));
  EXPECT_EQ(s.sigma_e2, std::vector<double>{0.02});
  EXPECT_EQ(s.seed, 5u);
  EXPECT_EQ(s.grid().size(), 2u);
  const auto back = spec_from_json(spec_to_json(s));
  EXPECT_EQ(back.k_a, s.k_a);
  EXPECT_EQ(back.methods, s.methods);
  EXPECT_THROW(spec_from_json("{"), ConfigError);
  EXPECT_THROW(spec_from_json(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW(spec_from_json(R"({"attack_norm": 1, "normalized_attack_norm": 0.1})"), ConfigError);
  EXPECT_THROW(spec_from_json(R"({"k_a": []})").grid(), ConfigError);
}

TEST(Thresholds, JsonRoundTripIsBitExact) {
  Thresholds t;
  t.alpha = 0.05;
  t.n_null = 321;
  t.seed = 17;
  t.points.push_back(ThresholdPoint{0.05, 0.01, 1.0 / 3.0, 0.1 + 0.2, std::nextafter(2.0, 3.0), 1e-300, 0.7071, -0.0});
  const auto back = thresholds_from_json(thresholds_to_json(t));
  EXPECT_EQ(back.n_null, t.n_null);
  EXPECT_EQ(back.seed, t.seed);
  ASSERT_EQ(back.points.size(), 1u);
  const auto& a = t.points[0];
  const auto& b = back.points[0];
  for (auto [x, y] : {std::pair{a.gamma_bdd, b.gamma_bdd}, {a.gamma_eng, b.gamma_eng}, {a.gamma_gic, b.gamma_gic},
                      {a.gamma_omp, b.gamma_omp}, {a.rho, b.rho}, {a.gamma_oracle_gic, b.gamma_oracle_gic},
                      {a.sigma_s2, b.sigma_s2}, {a.sigma_e2, b.sigma_e2}})
    EXPECT_TRUE(bit_equal(x, y)) << x << " vs " << y;
  EXPECT_NO_THROW(back.at(0.05, 0.01));
  EXPECT_THROW(back.at(0.05, 0.02), ConfigError);
  EXPECT_THROW(thresholds_from_json(R"({"alpha": 0.05})"), ConfigError);

  t.points[0].gamma_gic = -std::numeric_limits<double>::infinity();
  EXPECT_EQ(thresholds_from_json(thresholds_to_json(t)).points[0].gamma_gic, t.points[0].gamma_gic);
}

TEST(Aggregates, CsvRoundTrip) {
  Aggregate a;
  a.point = 3;
  a.method = Method::gmgic;
  a.scenario = ScenarioPoint{2, 0.1, 0.05, 0.01, 0.02};
  a.n_trials = 40;
  a.detection_rate = 0.875;
  a.false_alarm_rate = std::nan("");
  a.mean_f_score = 1.0 / 7.0;
  a.median_runtime_ns = 12345.0;
  Aggregate b = a;
  b.method = Method::bdd;
  b.scenario.eta.reset();
  const auto back = aggregates_from_csv(aggregates_to_csv({a, b}));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].method, Method::gmgic);
  EXPECT_EQ(back[0].scenario.eta, std::optional<double>(0.02));
  EXPECT_FALSE(back[1].scenario.eta.has_value());
  EXPECT_TRUE(bit_equal(back[0].mean_f_score, a.mean_f_score));
  EXPECT_TRUE(std::isnan(back[0].false_alarm_rate));
  EXPECT_EQ(back[0].n_trials, 40u);
  try {
    aggregates_from_csv(aggregates_to_csv({a}) + "1,gic,2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(MeasurementCsv, CommentsAndErrors) {
  const auto v = parse_measurement_csv("# header\n0.5\n\n-1e-3,  # trailing\n  2\n");
  ASSERT_EQ(v.size(), 3);
  EXPECT_EQ(v(1), -1e-3);
  try {
    parse_measurement_csv("1\n2\nabc\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_measurement_csv("1\ninf\n"), ParseError);
  EXPECT_EQ(load_measurement_csv(gridshield::testing::data_path("z_curr.csv")).size(), 71);
}

TEST(EmitResults, EmptyTableWritesNothing) {
  const auto dir = scratch_dir("empty");
  EXPECT_THROW(emit_results(ResultTable{}, dir.string(), OutputFormat::csv), ConfigError);
  EXPECT_FALSE(std::filesystem::exists(dir));
}

TEST(Calibration, RejectsTooFewNullRuns) {
  auto spec = small_spec();
  spec.n_null = 99;
  EXPECT_THROW(calibrate_thresholds(spec, ieee30()), ConfigError);
}

TEST(RunExperiment, IndependentOfThreadCount) {
  auto spec = small_spec();
  spec.threads = 1;
  const auto th = calibrate_thresholds(spec, ieee30());
  spec.threads = 4;
  const auto th4 = calibrate_thresholds(spec, ieee30());
  EXPECT_EQ(thresholds_to_json(th), thresholds_to_json(th4));

  spec.threads = 1;
  const auto one = run_experiment(spec, ieee30(), th);
  spec.threads = 4;
  const auto four = run_experiment(spec, ieee30(), th);
  ASSERT_EQ(one.records.size(), four.records.size());
  EXPECT_EQ(one.records.size(), 2 * 20 * spec.methods.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    const auto& a = one.records[i];
    const auto& b = four.records[i];
    EXPECT_EQ(a.method, b.method);
    EXPECT_EQ(a.trial, b.trial);
    EXPECT_EQ(a.selected_buses, b.selected_buses);
    EXPECT_EQ(a.true_buses, b.true_buses);
    EXPECT_TRUE(bit_equal(a.statistic, b.statistic));
  }
}

TEST(EmitResults, WritesSummaryAndManifest) {
  auto spec = small_spec();
  spec.methods = {Method::gic};
  spec.n_trials = 5;
  const auto table = run_experiment(spec, ieee30());
  const auto dir = scratch_dir("emit");
  const auto paths = emit_results(table, dir.string(), OutputFormat::json);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(std::filesystem::path(paths[0]).filename(), "results.json");
  const auto j = nlohmann::json::parse(read_text_file(paths[0]));
  EXPECT_EQ(j.at("manifest").at("seed").get<std::uint64_t>(), 99u);
  EXPECT_EQ(j.at("trials").size(), 10u);
  const auto rows = aggregates_from_csv(read_text_file((dir / "summary.csv").string()));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].n_trials, 5u);
  std::filesystem::remove_all(dir);
}

TEST(Calibration, BddRateAndScaling) {
  auto spec = small_spec();
  spec.n_null = 4000;
  spec.seed = 3;
  const auto th = calibrate_thresholds(spec, ieee30()).points.at(0);
  const MethodContext ctx(ieee30(), spec.k_c, spec.k_c_global, spec.zeta);
  const ScenarioPoint point{0, 0.0, 0.05, 0.01, std::nullopt};
  int alarms = 0;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    const auto d = simulate_trial(ieee30(), point, false, 4, i, Stream::null_trial);
    alarms += run_method(Method::bdd, ctx, d, point, th).verdict ? 1 : 0;
  }
  EXPECT_NEAR(alarms / 4000.0, 0.05, 0.015);

  // with no load change the statistics scale with sigma_e^2 on common draws
  spec.sigma_s2 = {0.0};
  spec.alpha = 0.5;
  const auto base = calibrate_thresholds(spec, ieee30()).points.at(0);
  spec.sigma_e2 = {0.02};
  const auto twice = calibrate_thresholds(spec, ieee30()).points.at(0);
  EXPECT_NEAR(twice.gamma_bdd / base.gamma_bdd, 2.0, 1e-9);
  EXPECT_NEAR(twice.gamma_eng / base.gamma_eng, 2.0, 1e-9);
  EXPECT_NEAR(twice.gamma_omp / base.gamma_omp, 2.0, 1e-9);
  // alpha = 0.5 sits at the median order statistic
  std::vector<double> eng;
  for (std::uint64_t i = 0; i < spec.n_null; ++i)
    eng.push_back(simulate_trial(ieee30(), ScenarioPoint{0, 0.0, 0.0, 0.02, std::nullopt}, false, 3, i,
                                 Stream::calibration).dz.squaredNorm());
  std::sort(eng.begin(), eng.end());
  EXPECT_EQ(twice.gamma_eng, eng[spec.n_null / 2 - 1]);
}
