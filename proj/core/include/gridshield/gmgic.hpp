#pragma once

#include <gridshield/gic.hpp>
#include <gridshield/grid_model.hpp>
#include <gridshield/types.hpp>

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace gridshield {

struct SuspiciousSet {
  Support nodes;
  std::map<Index, double> energies;  // node -> single-node projection energy
  double rho = 0.0;
  /// Largest single-node energy over the whole ground set.
  double max_energy = 0.0;
};

/// Nodes of the dictionary's ground set whose single-node energy exceeds rho.
SuspiciousSet prescreen(const Dictionary& dict, const Eigen::VectorXd& dz_L, double rho);

/// Graph on the suspicious nodes; `adjacency` is indexed by position in `nodes`.
struct AuxGraph {
  Support nodes;
  std::vector<std::vector<std::size_t>> adjacency;
};

/// Connects k, m in `nodes` when 1 <= hops(k, m) <= max_hops, with distances
/// taken on the full graph.
AuxGraph second_neighbor_graph(const Eigen::MatrixXi& hops, const Support& nodes, int max_hops = 2);

struct Partition {
  std::vector<Support> subsets;
  std::size_t count() const { return subsets.size(); }
};

/// Connected components, each sorted, ordered by their smallest node.
Partition partition_components(const AuxGraph& graph);

struct GmGicConfig {
  int k_c_subset = 6;  // sparsity of the local candidate families
  int k_c_global = 6;  // budget enforced on the union
  double rho = 0.0;
  double zeta = 2.0;
  /// Edge rule of the auxiliary graph (2 for the grid, 2 Psi for a GSP filter).
  int max_hops = 2;
};

/// Pre-screen, partition, local GIC per component (null score 0), union, and a
/// top-k_c_global cut by |ML value| when the union is too large. Ties in the cut
/// keep the smaller index. `detection_statistic` is the prescreen's max energy.
IdentificationResult gm_gic(const Dictionary& dict, const Eigen::VectorXd& dz_L, const GmGicConfig& config,
                            double sigma_e2);
IdentificationResult gm_gic(const TopologyMatrix& topo, const Eigen::VectorXd& dz_L, const GmGicConfig& config,
                            double sigma_e2);

/// Polynomial graph filter F = sum_i h_i S^i.
struct GraphFilter {
  std::vector<double> taps;  // h_0 .. h_Psi
  Eigen::MatrixXd shift;     // S

  int order() const { return static_cast<int>(taps.size()) - 1; }
};

/// Assembles F. Throws StructuralError when S has a nonzero entry between nodes
/// more than one hop apart, or DimensionError on size mismatches.
Eigen::MatrixXd filter_matrix(const GraphFilter& filter, const Eigen::MatrixXi& hops);

/// Dense adjacency matrix of an undirected graph.
Eigen::MatrixXd adjacency_matrix(const std::vector<std::vector<std::size_t>>& adjacency);

/// GM-GIC with F as dictionary, every node eligible, and aux-graph edges up to
/// 2 Psi hops. `config.max_hops` is overridden.
IdentificationResult gsp_sparse_recover(const GraphFilter& filter, const Eigen::MatrixXi& hops,
                                        const Eigen::VectorXd& y, GmGicConfig config, double sigma2);

}  // namespace gridshield
