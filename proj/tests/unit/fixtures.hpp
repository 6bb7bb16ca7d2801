#pragma once

#include <gridshield/experiment.hpp>
#include <gridshield/grid_model.hpp>

#include <string>

#ifndef GRIDSHIELD_DATA_DIR
#define GRIDSHIELD_DATA_DIR "data"
#endif

namespace gridshield::testing {

inline std::string data_path(const std::string& name) { return std::string(GRIDSHIELD_DATA_DIR) + "/" + name; }

inline const Workbench& ieee30() {
  static const Workbench wb(load_case_file(data_path("case30.m")));
  return wb;
}

/// Path graph 1-2-...-n with unit susceptances, slack at bus 1, loads elsewhere.
inline GridNetwork path_network(int n) {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  for (int i = 1; i <= n; ++i) buses.push_back(Bus{i, i == 1 ? BusClass::slack : BusClass::load, i == 1 ? 0.0 : 10.0, 0.0});
  for (int i = 1; i < n; ++i) branches.push_back(Branch{i, i + 1, 1.0});
  return GridNetwork(100.0, buses, branches);
}

}  // namespace gridshield::testing
