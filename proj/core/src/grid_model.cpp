#include <gridshield/grid_model.hpp>

#include <gridshield/errors.hpp>

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

namespace gridshield {

std::string_view to_string(BusClass c) {
  switch (c) {
    case BusClass::slack: return "slack";
    case BusClass::generator: return "generator";
    case BusClass::load: return "load";
    case BusClass::zero_load: return "zero_load";
  }
  return "unknown";
}

BusClass bus_class_from_string(std::string_view s) {
  if (s == "slack") return BusClass::slack;
  if (s == "generator") return BusClass::generator;
  if (s == "load") return BusClass::load;
  if (s == "zero_load") return BusClass::zero_load;
  throw ConfigError("unknown bus class '" + std::string(s) + "'");
}

GridNetwork::GridNetwork(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches)
    : base_mva_(base_mva), buses_(std::move(buses)), branches_(std::move(branches)) {
  if (!(base_mva_ > 0.0)) throw StructuralError("baseMVA must be positive");
  if (buses_.empty()) throw StructuralError("network has no buses");

  std::size_t slack_count = 0;
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (buses_[j].id == buses_[i].id)
        throw StructuralError("duplicate bus id " + std::to_string(buses_[i].id));
    if (buses_[i].bus_class == BusClass::slack) {
      ++slack_count;
      slack_ = i;
    }
  }
  if (slack_count != 1)
    throw StructuralError("expected exactly one slack bus, found " + std::to_string(slack_count));

  adjacency_.assign(buses_.size(), {});
  for (const auto& br : branches_) {
    if (!has_bus(br.from) || !has_bus(br.to))
      throw StructuralError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                            " references a bus missing from the bus table");
    if (br.from == br.to) throw StructuralError("self loop at bus " + std::to_string(br.from));
    if (!(br.susceptance > 0.0))
      throw StructuralError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                            " has non-positive susceptance");
    const auto a = index_of(br.from);
    const auto b = index_of(br.to);
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }

  std::vector<bool> seen(buses_.size(), false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (auto v : adjacency_[u])
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        queue.push_back(v);
      }
  }
  if (reached != buses_.size()) throw StructuralError("network graph is disconnected");
}

bool GridNetwork::has_bus(int id) const {
  return std::any_of(buses_.begin(), buses_.end(), [id](const Bus& b) { return b.id == id; });
}

std::size_t GridNetwork::index_of(int id) const {
  for (std::size_t i = 0; i < buses_.size(); ++i)
    if (buses_[i].id == id) return i;
  throw StructuralError("unknown bus id " + std::to_string(id));
}

GridNetwork load_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open case file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case_file(ss.str());
}

namespace {

Eigen::MatrixXd nodal_susceptance(const GridNetwork& net) {
  const auto n = static_cast<Index>(net.bus_count());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& br : net.branches()) {
    const auto a = static_cast<Index>(net.index_of(br.from));
    const auto b = static_cast<Index>(net.index_of(br.to));
    lap(a, a) += br.susceptance;
    lap(b, b) += br.susceptance;
    lap(a, b) -= br.susceptance;
    lap(b, a) -= br.susceptance;
  }
  return lap;
}

std::vector<Index> state_positions(const GridNetwork& net) {
  std::vector<Index> pos;
  for (std::size_t i = 0; i < net.bus_count(); ++i)
    if (i != net.slack_index()) pos.push_back(static_cast<Index>(i));
  return pos;
}

}  // namespace

Index TopologyMatrix::column_of_bus(int bus_id) const {
  const auto it = std::find(col_bus_.begin(), col_bus_.end(), bus_id);
  if (it == col_bus_.end())
    throw StructuralError("bus " + std::to_string(bus_id) + " has no state column (slack or unknown)");
  return static_cast<Index>(it - col_bus_.begin());
}

Eigen::VectorXd TopologyMatrix::load_part(const Eigen::VectorXd& z) const {
  if (z.size() != h_.rows())
    throw DimensionError("measurement vector has " + std::to_string(z.size()) + " entries, expected " +
                         std::to_string(h_.rows()));
  Eigen::VectorXd out(static_cast<Index>(load_rows_.size()));
  for (std::size_t i = 0; i < load_rows_.size(); ++i) out(static_cast<Index>(i)) = z(load_rows_[i]);
  return out;
}

std::vector<int> TopologyMatrix::buses_of(const Support& s) const {
  std::vector<int> ids;
  ids.reserve(s.size());
  for (auto c : s) ids.push_back(bus_of_column(c));
  return ids;
}

Support TopologyMatrix::columns_of(const std::vector<int>& bus_ids) const {
  Support s;
  for (int id : bus_ids) s.push_back(column_of_bus(id));
  return normalized(std::move(s));
}

TopologyMatrix build_topology(const GridNetwork& net, const std::optional<std::vector<int>>& restricted_override) {
  TopologyMatrix topo;
  const auto lap = nodal_susceptance(net);
  const auto states = state_positions(net);
  const auto n_bus = static_cast<Index>(net.bus_count());
  const auto n_state = static_cast<Index>(states.size());
  const auto n_meas = n_bus + static_cast<Index>(net.branches().size());

  std::vector<Index> state_of_bus(net.bus_count(), -1);
  for (Index j = 0; j < n_state; ++j) {
    state_of_bus[static_cast<std::size_t>(states[static_cast<std::size_t>(j)])] = j;
    topo.col_bus_.push_back(net.buses()[static_cast<std::size_t>(states[static_cast<std::size_t>(j)])].id);
  }

  topo.h_ = Eigen::MatrixXd::Zero(n_meas, n_state);
  for (Index i = 0; i < n_bus; ++i) {
    for (Index j = 0; j < n_state; ++j) topo.h_(i, j) = lap(i, states[static_cast<std::size_t>(j)]);
    MeasurementRow row;
    row.kind = MeasurementRow::Kind::injection;
    row.bus = net.buses()[static_cast<std::size_t>(i)].id;
    topo.rows_.push_back(row);
  }
  for (std::size_t k = 0; k < net.branches().size(); ++k) {
    const auto& br = net.branches()[k];
    const auto r = n_bus + static_cast<Index>(k);
    const auto sf = state_of_bus[net.index_of(br.from)];
    const auto st = state_of_bus[net.index_of(br.to)];
    if (sf >= 0) topo.h_(r, sf) += br.susceptance;
    if (st >= 0) topo.h_(r, st) -= br.susceptance;
    MeasurementRow row;
    row.kind = MeasurementRow::Kind::flow;
    row.from = br.from;
    row.to = br.to;
    row.branch = k;
    topo.rows_.push_back(row);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(topo.h_);
  qr.setThreshold(1e-10);
  if (qr.rank() != n_state)
    throw StructuralError("topology matrix is rank deficient after slack removal (rank " +
                          std::to_string(qr.rank()) + " < " + std::to_string(n_state) + ")");

  std::vector<Index> other_injection_rows;
  for (Index i = 0; i < n_bus; ++i) {
    if (net.buses()[static_cast<std::size_t>(i)].bus_class == BusClass::load)
      topo.load_rows_.push_back(i);
    else
      other_injection_rows.push_back(i);
  }

  Eigen::MatrixXd load_block(static_cast<Index>(topo.load_rows_.size()), n_state);
  for (std::size_t r = 0; r < topo.load_rows_.size(); ++r)
    load_block.row(static_cast<Index>(r)) = topo.h_.row(topo.load_rows_[r]);

  if (restricted_override) {
    topo.restricted_ = topo.columns_of(*restricted_override);
  } else {
    for (Index j = 0; j < n_state; ++j) {
      bool touches_secured = false;
      for (auto r : other_injection_rows) touches_secured = touches_secured || topo.h_(r, j) != 0.0;
      if (!touches_secured && load_block.col(j).squaredNorm() > 0.0) topo.restricted_.push_back(j);
    }
  }

  const auto bus_hops = geodesic_distances(net);
  Eigen::MatrixXi hops(n_state, n_state);
  for (Index a = 0; a < n_state; ++a)
    for (Index b = 0; b < n_state; ++b)
      hops(a, b) = bus_hops(states[static_cast<std::size_t>(a)], states[static_cast<std::size_t>(b)]);

  topo.dictionary_ = Dictionary{std::move(load_block), std::move(hops), topo.restricted_};
  return topo;
}

Eigen::VectorXd dc_power_flow(const GridNetwork& net, const Eigen::VectorXd& injections) {
  const auto states = state_positions(net);
  const auto n = static_cast<Index>(states.size());
  if (injections.size() != n)
    throw DimensionError("expected " + std::to_string(n) + " non-slack injections, got " +
                         std::to_string(injections.size()));
  const auto lap = nodal_susceptance(net);
  Eigen::MatrixXd reduced(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) reduced(a, b) = lap(states[static_cast<std::size_t>(a)], states[static_cast<std::size_t>(b)]);

  Eigen::LLT<Eigen::MatrixXd> llt(reduced);
  if (llt.info() != Eigen::Success) throw StructuralError("reduced susceptance matrix is singular");
  Eigen::VectorXd theta = llt.solve(injections);
  const double scale = std::max(1.0, injections.norm());
  if ((reduced * theta - injections).norm() > 1e-10 * scale)
    throw StructuralError("DC power flow solve did not converge to tolerance");
  return theta;
}

Eigen::VectorXd base_injections(const GridNetwork& net) {
  const auto states = state_positions(net);
  Eigen::VectorXd p(static_cast<Index>(states.size()));
  for (std::size_t j = 0; j < states.size(); ++j) {
    const auto& bus = net.buses()[static_cast<std::size_t>(states[j])];
    p(static_cast<Index>(j)) = (bus.gen_mw - bus.load_mw) / net.base_mva();
  }
  return p;
}

Eigen::MatrixXi hop_distances(const std::vector<std::vector<std::size_t>>& adjacency) {
  const auto n = static_cast<Index>(adjacency.size());
  Eigen::MatrixXi d = Eigen::MatrixXi::Constant(n, n, -1);
  for (Index s = 0; s < n; ++s) {
    d(s, s) = 0;
    std::deque<std::size_t> queue{static_cast<std::size_t>(s)};
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      for (auto v : adjacency[u])
        if (d(s, static_cast<Index>(v)) < 0) {
          d(s, static_cast<Index>(v)) = d(s, static_cast<Index>(u)) + 1;
          queue.push_back(v);
        }
    }
  }
  // unreachable pairs stay "infinitely" far
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (d(i, j) < 0) d(i, j) = std::numeric_limits<int>::max();
  return d;
}

Eigen::MatrixXi geodesic_distances(const GridNetwork& net) {
  std::vector<std::vector<std::size_t>> adj(net.bus_count());
  for (std::size_t i = 0; i < net.bus_count(); ++i) adj[i] = net.neighbors(i);
  return hop_distances(adj);
}

}  // namespace gridshield
