#include <gridshield/gmgic.hpp>

#include <gridshield/errors.hpp>
#include <gridshield/projection.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace gridshield {

SuspiciousSet prescreen(const Dictionary& dict, const Eigen::VectorXd& dz_L, double rho) {
  if (rho < 0.0) throw ConfigError("rho must be non-negative");
  const auto e = single_node_energies(dict.atoms, dict.ground_set, dz_L);
  SuspiciousSet s;
  s.rho = rho;
  for (std::size_t i = 0; i < dict.ground_set.size(); ++i) {
    const double v = e(static_cast<Index>(i));
    s.max_energy = std::max(s.max_energy, v);
    if (v > rho) {
      s.nodes.push_back(dict.ground_set[i]);
      s.energies.emplace(dict.ground_set[i], v);
    }
  }
  s.nodes = normalized(std::move(s.nodes));
  return s;
}

AuxGraph second_neighbor_graph(const Eigen::MatrixXi& hops, const Support& nodes, int max_hops) {
  AuxGraph g;
  g.nodes = normalized(nodes);
  g.adjacency.resize(g.nodes.size());
  for (std::size_t a = 0; a < g.nodes.size(); ++a)
    for (std::size_t b = a + 1; b < g.nodes.size(); ++b) {
      const int d = hops(g.nodes[a], g.nodes[b]);
      if (d >= 1 && d <= max_hops) {
        g.adjacency[a].push_back(b);
        g.adjacency[b].push_back(a);
      }
    }
  return g;
}

Partition partition_components(const AuxGraph& graph) {
  Partition p;
  std::vector<bool> seen(graph.nodes.size(), false);
  for (std::size_t start = 0; start < graph.nodes.size(); ++start) {
    if (seen[start]) continue;
    Support comp;
    std::queue<std::size_t> q;
    q.push(start);
    seen[start] = true;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      comp.push_back(graph.nodes[u]);
      for (auto v : graph.adjacency[u])
        if (!seen[v]) {
          seen[v] = true;
          q.push(v);
        }
    }
    p.subsets.push_back(normalized(std::move(comp)));
  }
  // nodes are sorted, so components already come out ordered by smallest node
  return p;
}

IdentificationResult gm_gic(const Dictionary& dict, const Eigen::VectorXd& dz_L, const GmGicConfig& config,
                            double sigma_e2) {
  if (config.k_c_subset < 1 || config.k_c_global < 1) throw ConfigError("K_c must be at least 1");
  if (!(sigma_e2 > 0.0)) throw DomainError("sigma_e2 must be positive");

  IdentificationResult out;
  const auto screened = prescreen(dict, dz_L, config.rho);
  out.detection_statistic = screened.max_energy;
  if (screened.nodes.empty()) return out;

  const auto parts = partition_components(second_neighbor_graph(dict.hops, screened.nodes, config.max_hops));
  const PenaltyConfig local{config.zeta, 0.0};
  Support joined;
  for (const auto& subset : parts.subsets) {
    const CandidateFamily family(subset, config.k_c_subset);
    auto partial = gic_select(dict.atoms, dz_L, family, local, sigma_e2);
    joined.insert(joined.end(), partial.support.begin(), partial.support.end());
    out.skipped.insert(out.skipped.end(), partial.skipped.begin(), partial.skipped.end());
  }
  joined = normalized(std::move(joined));

  if (static_cast<int>(joined.size()) > config.k_c_global) {
    Eigen::VectorXd c;
    try {
      c = ml_attack_estimate(select_columns(dict.atoms, joined), dz_L);
    } catch (const DegenerateSupportError&) {
      // fall back to per-atom least squares
      c.resize(static_cast<Index>(joined.size()));
      for (std::size_t i = 0; i < joined.size(); ++i) {
        const auto col = dict.atoms.col(joined[i]);
        c(static_cast<Index>(i)) = col.dot(dz_L) / col.squaredNorm();
      }
    }
    std::vector<std::size_t> order(joined.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(c(static_cast<Index>(a))) > std::abs(c(static_cast<Index>(b)));
    });
    Support kept;
    for (int i = 0; i < config.k_c_global; ++i) kept.push_back(joined[order[static_cast<std::size_t>(i)]]);
    joined = normalized(std::move(kept));
  }

  out.support = joined;
  out.attack_detected = !joined.empty();
  if (out.attack_detected) {
    try {
      out.values = ml_attack_estimate(select_columns(dict.atoms, joined), dz_L);
    } catch (const DegenerateSupportError&) {
      out.values = Eigen::VectorXd::Zero(static_cast<Index>(joined.size()));
    }
  }
  return out;
}

IdentificationResult gm_gic(const TopologyMatrix& topo, const Eigen::VectorXd& dz_L, const GmGicConfig& config,
                            double sigma_e2) {
  return gm_gic(topo.dictionary(), dz_L, config, sigma_e2);
}

Eigen::MatrixXd filter_matrix(const GraphFilter& filter, const Eigen::MatrixXi& hops) {
  const auto& s = filter.shift;
  if (s.rows() != s.cols()) throw DimensionError("shift operator must be square");
  if (hops.rows() != s.rows() || hops.cols() != s.cols()) throw DimensionError("shift operator and graph differ in size");
  if (filter.taps.empty()) throw ConfigError("graph filter needs at least one tap");
  for (Index k = 0; k < s.rows(); ++k)
    for (Index m = 0; m < s.cols(); ++m)
      if (s(k, m) != 0.0 && hops(k, m) > 1)
        throw StructuralError("shift operator couples nodes " + std::to_string(k) + " and " + std::to_string(m) +
                              " which are not neighbors");

  const auto n = s.rows();
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < filter.taps.size(); ++i) {
    if (i > 0) power = power * s;
    f += filter.taps[i] * power;
  }
  return f;
}

Eigen::MatrixXd adjacency_matrix(const std::vector<std::vector<std::size_t>>& adjacency) {
  const auto n = static_cast<Index>(adjacency.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t u = 0; u < adjacency.size(); ++u)
    for (auto v : adjacency[u]) {
      a(static_cast<Index>(u), static_cast<Index>(v)) = 1.0;
      a(static_cast<Index>(v), static_cast<Index>(u)) = 1.0;
    }
  return a;
}

IdentificationResult gsp_sparse_recover(const GraphFilter& filter, const Eigen::MatrixXi& hops,
                                        const Eigen::VectorXd& y, GmGicConfig config, double sigma2) {
  Dictionary dict;
  dict.atoms = filter_matrix(filter, hops);
  if (y.size() != dict.atoms.rows()) throw DimensionError("graph signal length does not match the filter");
  dict.hops = hops;
  dict.ground_set.resize(static_cast<std::size_t>(dict.atoms.cols()));
  std::iota(dict.ground_set.begin(), dict.ground_set.end(), Index{0});
  config.max_hops = 2 * filter.order();
  return gm_gic(dict, y, config, sigma2);
}

}  // namespace gridshield
