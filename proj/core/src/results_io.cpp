#include <gridshield/errors.hpp>
#include <gridshield/experiment.hpp>
#include <gridshield/version.hpp>

#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace gridshield {

using nlohmann::json;

namespace {

template <class T>
std::vector<T> scalar_or_list(const json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw ParseError("malformed number '" + s + "'", 0);
  return v;
}

json point_json(const ScenarioPoint& p) {
  json j{{"k_a", p.k_a}, {"attack_norm", p.attack_norm}, {"sigma_s2", p.sigma_s2}, {"sigma_e2", p.sigma_e2}};
  j["eta"] = p.eta ? json(*p.eta) : json(nullptr);
  return j;
}

}  // namespace

ExperimentSpec spec_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  try {
    ExperimentSpec s;
    s.case_path = j.value("case", std::string());
    if (j.contains("methods") || j.contains("method")) {
      s.methods.clear();
      for (const auto& name : scalar_or_list<std::string>(j, j.contains("methods") ? "methods" : "method", {}))
        s.methods.push_back(method_from_string(name));
    }
    s.k_a = scalar_or_list<int>(j, "k_a", s.k_a);
    if (j.contains("attack_norm") && j.contains("normalized_attack_norm"))
      throw ConfigError("give either attack_norm or normalized_attack_norm, not both");
    if (j.contains("normalized_attack_norm")) {
      s.attack_norm = scalar_or_list<double>(j, "normalized_attack_norm", {});
      s.attack_norm_per_node = true;
    } else {
      s.attack_norm = scalar_or_list<double>(j, "attack_norm", s.attack_norm);
    }
    s.sigma_s2 = scalar_or_list<double>(j, "sigma_s2", s.sigma_s2);
    s.sigma_e2 = scalar_or_list<double>(j, "sigma_e2", s.sigma_e2);
    s.eta = scalar_or_list<double>(j, "eta", {});
    s.n_trials = j.value("n_trials", s.n_trials);
    s.null_trials = j.value("null_trials", s.null_trials);
    s.n_null = j.value("n_null", s.n_null);
    s.alpha = j.value("alpha", s.alpha);
    s.seed = j.value("seed", s.seed);
    s.k_c = j.value("k_c", s.k_c);
    s.k_c_global = j.value("k_c_global", s.k_c);
    s.zeta = j.value("zeta", s.zeta);
    s.threads = j.value("threads", s.threads);
    if (j.contains("restricted_buses")) s.restricted_buses = j.at("restricted_buses").get<std::vector<int>>();
    for (const auto& [key, _] : j.items()) {
      static const char* known[] = {"case",     "methods",    "method",    "k_a",   "attack_norm",
                                    "normalized_attack_norm", "sigma_s2", "sigma_e2", "eta", "n_trials",
                                    "null_trials", "n_null",  "alpha",     "seed",  "k_c",
                                    "k_c_global", "zeta",     "threads",   "restricted_buses"};
      if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
        throw ConfigError("unknown config key '" + key + "'");
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
}

std::string spec_to_json(const ExperimentSpec& s) {
  json j;
  j["case"] = s.case_path;
  j["methods"] = json::array();
  for (auto m : s.methods) j["methods"].push_back(std::string(to_string(m)));
  j["k_a"] = s.k_a;
  j[s.attack_norm_per_node ? "normalized_attack_norm" : "attack_norm"] = s.attack_norm;
  j["sigma_s2"] = s.sigma_s2;
  j["sigma_e2"] = s.sigma_e2;
  j["eta"] = s.eta;
  j["n_trials"] = s.n_trials;
  j["null_trials"] = s.null_trials;
  j["n_null"] = s.n_null;
  j["alpha"] = s.alpha;
  j["seed"] = s.seed;
  j["k_c"] = s.k_c;
  j["k_c_global"] = s.k_c_global;
  j["zeta"] = s.zeta;
  j["threads"] = s.threads;
  if (s.restricted_buses) j["restricted_buses"] = *s.restricted_buses;
  return j.dump(2);
}

std::string thresholds_to_json(const Thresholds& t) {
  json j{{"alpha", t.alpha}, {"n_null", t.n_null}, {"seed", t.seed}, {"zeta", t.zeta}, {"k_c", t.k_c}};
  j["version"] = kVersion;
  j["points"] = json::array();
  for (const auto& p : t.points)
    j["points"].push_back({{"sigma_s2", p.sigma_s2},
                           {"sigma_e2", p.sigma_e2},
                           {"gamma_bdd", p.gamma_bdd},
                           {"gamma_eng", p.gamma_eng},
                           {"gamma_gic", p.gamma_gic},
                           {"gamma_omp", p.gamma_omp},
                           {"rho", p.rho},
                           {"gamma_oracle_gic", p.gamma_oracle_gic}});
  return j.dump(2);
}

namespace {

// An empty candidate family calibrates to -inf, which JSON stores as null.
double threshold_value(const json& p, const char* key) {
  const auto& v = p.at(key);
  return v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>();
}

}  // namespace

Thresholds thresholds_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    Thresholds t;
    t.alpha = j.at("alpha").get<double>();
    t.n_null = j.at("n_null").get<std::size_t>();
    t.seed = j.value("seed", std::uint64_t{0});
    t.zeta = j.value("zeta", 2.0);
    t.k_c = j.value("k_c", 6);
    for (const auto& p : j.at("points")) {
      ThresholdPoint tp;
      tp.sigma_s2 = p.at("sigma_s2").get<double>();
      tp.sigma_e2 = p.at("sigma_e2").get<double>();
      tp.gamma_bdd = threshold_value(p, "gamma_bdd");
      tp.gamma_eng = threshold_value(p, "gamma_eng");
      tp.gamma_gic = threshold_value(p, "gamma_gic");
      tp.gamma_omp = threshold_value(p, "gamma_omp");
      tp.rho = threshold_value(p, "rho");
      tp.gamma_oracle_gic = threshold_value(p, "gamma_oracle_gic");
      t.points.push_back(tp);
    }
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("thresholds file: ") + e.what());
  }
}

OutputFormat format_from_string(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ConfigError("unknown output format '" + std::string(s) + "'");
}

const std::vector<std::string>& aggregate_csv_header() {
  static const std::vector<std::string> header{
      "point",          "method",          "k_a",          "attack_norm", "sigma_s2",  "sigma_e2",
      "eta",            "n_trials",        "n_errors",     "detection_rate", "false_alarm_rate", "pd_at_alpha",
      "mean_f_score",   "f_score_se",      "mean_mse",     "median_runtime_ns", "mean_eta"};
  return header;
}

std::string aggregates_to_csv(const std::vector<Aggregate>& rows) {
  std::ostringstream os;
  const auto& h = aggregate_csv_header();
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << '\n';
  for (const auto& a : rows) {
    os << a.point << ',' << to_string(a.method) << ',' << a.scenario.k_a << ',' << fmt(a.scenario.attack_norm) << ','
       << fmt(a.scenario.sigma_s2) << ',' << fmt(a.scenario.sigma_e2) << ','
       << (a.scenario.eta ? fmt(*a.scenario.eta) : std::string()) << ',' << a.n_trials << ',' << a.n_errors << ','
       << fmt(a.detection_rate) << ',' << fmt(a.false_alarm_rate) << ',' << fmt(a.pd_at_alpha) << ','
       << fmt(a.mean_f_score) << ',' << fmt(a.f_score_se) << ',' << fmt(a.mean_mse) << ','
       << fmt(a.median_runtime_ns) << ',' << fmt(a.mean_eta) << '\n';
  }
  return os.str();
}

std::vector<Aggregate> aggregates_from_csv(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<Aggregate> out;
  const auto& h = aggregate_csv_header();
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (line_no == 1) {
      if (cells != h) throw ParseError("unexpected CSV header", line_no);
      continue;
    }
    if (cells.size() != h.size())
      throw ParseError("expected " + std::to_string(h.size()) + " cells, got " + std::to_string(cells.size()), line_no);
    try {
      Aggregate a;
      a.point = static_cast<std::size_t>(std::stoull(cells[0]));
      a.method = method_from_string(cells[1]);
      a.scenario.k_a = std::stoi(cells[2]);
      a.scenario.attack_norm = parse_double(cells[3]);
      a.scenario.sigma_s2 = parse_double(cells[4]);
      a.scenario.sigma_e2 = parse_double(cells[5]);
      if (!cells[6].empty()) a.scenario.eta = parse_double(cells[6]);
      a.n_trials = static_cast<std::size_t>(std::stoull(cells[7]));
      a.n_errors = static_cast<std::size_t>(std::stoull(cells[8]));
      a.detection_rate = parse_double(cells[9]);
      a.false_alarm_rate = parse_double(cells[10]);
      a.pd_at_alpha = parse_double(cells[11]);
      a.mean_f_score = parse_double(cells[12]);
      a.f_score_se = parse_double(cells[13]);
      a.mean_mse = parse_double(cells[14]);
      a.median_runtime_ns = parse_double(cells[15]);
      a.mean_eta = parse_double(cells[16]);
      out.push_back(a);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    } catch (const std::logic_error& e) {
      throw ParseError(std::string("malformed cell: ") + e.what(), line_no);
    }
  }
  return out;
}

std::string results_to_json(const ResultTable& table) {
  json j;
  j["manifest"] = {{"library", "gridshield"},
                   {"version", kVersion},
                   {"seed", table.spec.seed},
                   {"spec", json::parse(spec_to_json(table.spec))},
                   {"thresholds", json::parse(thresholds_to_json(table.thresholds))}};
  j["points"] = json::array();
  for (const auto& p : table.points) j["points"].push_back(point_json(p));
  j["aggregates"] = json::array();
  for (const auto& a : table.aggregates) {
    json row = point_json(a.scenario);
    row["point"] = a.point;
    row["method"] = std::string(to_string(a.method));
    row["n_trials"] = a.n_trials;
    row["n_errors"] = a.n_errors;
    row["detection_rate"] = number_or_null(a.detection_rate);
    row["false_alarm_rate"] = number_or_null(a.false_alarm_rate);
    row["pd_at_alpha"] = number_or_null(a.pd_at_alpha);
    row["mean_f_score"] = number_or_null(a.mean_f_score);
    row["f_score_se"] = number_or_null(a.f_score_se);
    row["mean_mse"] = number_or_null(a.mean_mse);
    row["median_runtime_ns"] = number_or_null(a.median_runtime_ns);
    row["mean_eta"] = number_or_null(a.mean_eta);
    j["aggregates"].push_back(row);
  }
  j["trials"] = json::array();
  for (const auto& r : table.records) {
    json row{{"point", r.point},
             {"method", std::string(to_string(r.method))},
             {"trial", r.trial},
             {"attacked", r.attacked},
             {"true_support", r.true_buses},
             {"selected_support", r.selected_buses},
             {"verdict", r.verdict},
             {"statistic", number_or_null(r.statistic)},
             {"f_score", r.f_score},
             {"mse", r.mse},
             {"wall_ns", r.wall_ns},
             {"eta", r.eta}};
    if (!r.error.empty()) row["error"] = r.error;
    j["trials"].push_back(row);
  }
  return j.dump(1);
}

std::vector<std::string> emit_results(const ResultTable& table, const std::string& dir, OutputFormat format) {
  if (table.points.empty() || table.aggregates.empty()) throw ConfigError("result table is empty; nothing to write");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  const auto csv_path = (std::filesystem::path(dir) / "summary.csv").string();
  const auto json_path = (std::filesystem::path(dir) / "results.json").string();
  write_text_file(csv_path, aggregates_to_csv(table.aggregates));
  write_text_file(json_path, results_to_json(table));
  if (format == OutputFormat::json) return {json_path, csv_path};
  return {csv_path, json_path};
}

Eigen::VectorXd parse_measurement_csv(std::string_view text) {
  std::vector<double> values;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r,");
    const auto cell = line.substr(first, last - first + 1);
    try {
      values.push_back(parse_double(cell));
    } catch (const ParseError&) {
      throw ParseError("malformed measurement '" + cell + "'", line_no);
    }
    if (!std::isfinite(values.back())) throw ParseError("measurement is not finite", line_no);
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Index>(values.size()));
}

Eigen::VectorXd load_measurement_csv(const std::string& path) { return parse_measurement_csv(read_text_file(path)); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "': " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "': " + std::strerror(errno));
  out << text;
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace gridshield
