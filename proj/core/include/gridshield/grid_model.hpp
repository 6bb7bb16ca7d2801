#pragma once

#include <gridshield/types.hpp>

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridshield {

enum class BusClass { slack, generator, load, zero_load };

std::string_view to_string(BusClass c);
BusClass bus_class_from_string(std::string_view s);

struct Bus {
  int id = 0;
  BusClass bus_class = BusClass::load;
  double load_mw = 0.0;
  /// Scheduled generation at the bus; only used to build the base operating point.
  double gen_mw = 0.0;
};

struct Branch {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;  // per unit, B = 1/x
};

/// Undirected weighted graph of buses and lines. Validated on construction:
/// one slack bus, known endpoints, no self loops, positive susceptances, connected.
class GridNetwork {
 public:
  GridNetwork(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches);

  double base_mva() const { return base_mva_; }
  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t bus_count() const { return buses_.size(); }

  /// Position of bus `id` in buses(). Throws StructuralError for unknown ids.
  std::size_t index_of(int id) const;
  bool has_bus(int id) const;
  std::size_t slack_index() const { return slack_; }

  /// Bus positions adjacent to bus position `i` (deduplicated, ascending).
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_[i]; }

 private:
  double base_mva_;
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::size_t slack_ = 0;
};

/// Reads either a MATPOWER-style `.m` case or the native JSON grid format,
/// chosen by sniffing the first non-blank character.
GridNetwork parse_case_file(std::string_view text);
GridNetwork parse_matpower(std::string_view text);
GridNetwork parse_grid_json(std::string_view text);
GridNetwork load_case_file(const std::string& path);

/// Native JSON representation, inverse of parse_grid_json.
std::string to_grid_json(const GridNetwork& net);

struct MeasurementRow {
  enum class Kind { injection, flow };
  Kind kind = Kind::injection;
  int bus = 0;           // injection bus id
  int from = 0, to = 0;  // flow endpoints (bus ids)
  std::size_t branch = 0;
};

/// DC measurement Jacobian: one injection row per bus (bus order) followed by one
/// from->to flow row per branch. The slack column is removed.
class TopologyMatrix {
 public:
  const Eigen::MatrixXd& H() const { return h_; }
  Index measurement_count() const { return h_.rows(); }
  Index state_count() const { return h_.cols(); }

  const std::vector<MeasurementRow>& row_map() const { return rows_; }
  /// Bus id behind each state column.
  const std::vector<int>& col_map() const { return col_bus_; }
  Index column_of_bus(int bus_id) const;
  int bus_of_column(Index col) const { return col_bus_.at(static_cast<std::size_t>(col)); }

  /// Rows holding injections at load-class buses (the attackable rows).
  const std::vector<Index>& load_rows() const { return load_rows_; }
  /// Columns eligible for an attack support.
  const Support& restricted_states() const { return restricted_; }

  /// H restricted to the load rows.
  const Eigen::MatrixXd& load_block() const { return dictionary_.atoms; }
  /// Load block with hop distances between state buses and the restricted ground set.
  const Dictionary& dictionary() const { return dictionary_; }
  /// Hop distance between the buses behind two state columns.
  int hops(Index a, Index b) const { return dictionary_.hops(a, b); }

  Eigen::VectorXd load_part(const Eigen::VectorXd& z) const;
  std::vector<int> buses_of(const Support& s) const;
  Support columns_of(const std::vector<int>& bus_ids) const;

 private:
  friend TopologyMatrix build_topology(const GridNetwork&, const std::optional<std::vector<int>>&);

  Eigen::MatrixXd h_;
  std::vector<MeasurementRow> rows_;
  std::vector<int> col_bus_;
  std::vector<Index> load_rows_;
  Support restricted_;
  Dictionary dictionary_;
};

/// Builds H, the row/column maps, the load rows and the restricted state set.
/// Without an override, a state column is eligible when it is nonzero on the load
/// rows and structurally zero on every non-load injection row, so that an attack
/// on it never touches generator or zero-load injections.
TopologyMatrix build_topology(const GridNetwork& net,
                              const std::optional<std::vector<int>>& restricted_override = std::nullopt);

/// Solves the reduced nodal susceptance system with the slack angle fixed at 0.
/// `injections` are per-unit and indexed like the state columns.
Eigen::VectorXd dc_power_flow(const GridNetwork& net, const Eigen::VectorXd& injections);

/// Per-unit injections (Pg - Pd) / baseMVA at the non-slack buses, state order.
Eigen::VectorXd base_injections(const GridNetwork& net);

/// All-pairs hop counts by breadth-first search over an adjacency list.
Eigen::MatrixXi hop_distances(const std::vector<std::vector<std::size_t>>& adjacency);

/// All-pairs hop counts between buses (bus order).
Eigen::MatrixXi geodesic_distances(const GridNetwork& net);

}  // namespace gridshield
