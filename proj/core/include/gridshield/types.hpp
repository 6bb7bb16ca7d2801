#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace gridshield {

using Index = Eigen::Index;

/// Sorted, duplicate-free set of dictionary column indices.
using Support = std::vector<Index>;

/// Sorts and deduplicates in place.
Support normalized(Support s);

/// Column-wise view of a sparse-recovery problem: the dictionary atoms, the hop
/// distance between the graph nodes behind each pair of atoms, and the subset of
/// atoms that may appear in a support.
struct Dictionary {
  Eigen::MatrixXd atoms;
  Eigen::MatrixXi hops;
  Support ground_set;

  Index rows() const { return atoms.rows(); }
  Index cols() const { return atoms.cols(); }
};

struct CandidateScore {
  Support support;
  double score = 0.0;
};

/// One greedy step of OMP.
struct OmpStep {
  Index selected = -1;
  double energy = 0.0;           // ||P_{k} r||^2 of the chosen atom
  double residual_energy = 0.0;  // ||r||^2 after the update
};

/// Output shared by every identifier (GIC, OMP, GM-GIC, oracle GIC).
struct IdentificationResult {
  Support support;
  Eigen::VectorXd values;  // ML attack values on `support`, same order
  bool attack_detected = false;
  /// Scalar the detector thresholds; larger means more evidence of an attack.
  double detection_statistic = 0.0;
  /// Score table in enumeration order, null hypothesis first (GIC family only).
  std::vector<CandidateScore> scores;
  std::vector<OmpStep> trace;
  /// Candidate supports skipped because their columns were degenerate.
  std::vector<Support> skipped;
};

/// Embeds `values` over `support` into a zero vector of length `n`.
Eigen::VectorXd embed(const Support& support, const Eigen::VectorXd& values, Index n);

/// Columns of `m` listed in `support`.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const Support& support);

std::string to_string(const Support& s);

}  // namespace gridshield
