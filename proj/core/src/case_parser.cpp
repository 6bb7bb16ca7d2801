#include <gridshield/errors.hpp>
#include <gridshield/grid_model.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace gridshield {

namespace {

struct Table {
  std::vector<std::vector<double>> rows;
  std::size_t first_line = 0;
  std::vector<std::size_t> row_lines;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view tok, std::size_t line) {
  if (tok == "Inf" || tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "-Inf" || tok == "-inf") return -std::numeric_limits<double>::infinity();
  if (tok == "NaN" || tok == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("malformed number '" + std::string(tok) + "'", line);
  return v;
}

/// Splits the body of a bracketed matrix segment into rows of numbers. `current`
/// accumulates the row under construction across lines.
void consume_matrix_text(std::string_view text, std::size_t line, Table& table, std::vector<double>& current,
                         std::size_t& current_line) {
  std::size_t i = 0;
  auto flush = [&] {
    if (!current.empty()) {
      table.rows.push_back(std::move(current));
      table.row_lines.push_back(current_line);
      current.clear();
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == ';') {
      flush();
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != ';' && text[j] != ',')
      ++j;
    if (current.empty()) current_line = line;
    current.push_back(parse_number(text.substr(i, j - i), line));
    i = j;
  }
}

const std::vector<double>& checked_row(const Table& t, std::size_t r, std::size_t min_cols, const char* name) {
  const auto& row = t.rows[r];
  if (row.size() < min_cols)
    throw ParseError(std::string("mpc.") + name + " row has " + std::to_string(row.size()) +
                         " columns, need at least " + std::to_string(min_cols),
                     t.row_lines[r]);
  return row;
}

int as_bus_id(double v, std::size_t line) {
  if (!(v == std::floor(v)) || v < 0 || v > 1e9) throw ParseError("bus id must be a non-negative integer", line);
  return static_cast<int>(v);
}

}  // namespace

GridNetwork parse_matpower(std::string_view text) {
  std::optional<double> base_mva;
  std::map<std::string, Table> tables;
  std::string open_table;
  std::vector<double> current;
  std::size_t current_line = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto pct = line.find('%'); pct != std::string_view::npos) line = line.substr(0, pct);
    line = trim(line);
    if (line.empty()) continue;

    if (!open_table.empty()) {
      const auto close = line.find(']');
      auto& table = tables[open_table];
      if (close == std::string_view::npos) {
        consume_matrix_text(line, line_no, table, current, current_line);
        // a newline also terminates a row
        if (!current.empty()) {
          table.rows.push_back(std::move(current));
          table.row_lines.push_back(current_line);
          current.clear();
        }
      } else {
        consume_matrix_text(line.substr(0, close), line_no, table, current, current_line);
        if (!current.empty()) {
          table.rows.push_back(std::move(current));
          table.row_lines.push_back(current_line);
          current.clear();
        }
        open_table.clear();
      }
      continue;
    }

    if (line.rfind("mpc.", 0) != 0) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected '=' after field name", line_no);
    const auto name = std::string(trim(line.substr(4, eq - 4)));
    auto rhs = trim(line.substr(eq + 1));

    if (name == "baseMVA") {
      if (!rhs.empty() && rhs.back() == ';') rhs.remove_suffix(1);
      base_mva = parse_number(trim(rhs), line_no);
      continue;
    }
    if (rhs.empty() || rhs.front() != '[') continue;  // strings, cell arrays, ...

    rhs.remove_prefix(1);
    auto& table = tables[name];
    table = Table{};
    table.first_line = line_no;
    const auto close = rhs.find(']');
    consume_matrix_text(close == std::string_view::npos ? rhs : rhs.substr(0, close), line_no, table, current,
                        current_line);
    if (!current.empty()) {
      table.rows.push_back(std::move(current));
      table.row_lines.push_back(current_line);
      current.clear();
    }
    if (close == std::string_view::npos) open_table = name;
  }
  if (!open_table.empty())
    throw ParseError("unterminated matrix mpc." + open_table, tables[open_table].first_line);
  if (!base_mva) throw ParseError("missing mpc.baseMVA", 0);
  if (!tables.count("bus")) throw ParseError("missing mpc.bus table", 0);
  if (!tables.count("branch")) throw ParseError("missing mpc.branch table", 0);

  for (const auto& [name, t] : tables) {
    for (std::size_t r = 1; r < t.rows.size(); ++r)
      if (t.rows[r].size() != t.rows[0].size())
        throw ParseError("mpc." + name + " row has " + std::to_string(t.rows[r].size()) + " columns, expected " +
                             std::to_string(t.rows[0].size()),
                         t.row_lines[r]);
  }

  std::map<int, double> gen_mw;
  std::set<int> gen_buses;
  if (auto it = tables.find("gen"); it != tables.end()) {
    for (std::size_t r = 0; r < it->second.rows.size(); ++r) {
      const auto& row = checked_row(it->second, r, 2, "gen");
      const int id = as_bus_id(row[0], it->second.row_lines[r]);
      gen_buses.insert(id);
      gen_mw[id] += row[1];
    }
  }

  std::vector<Bus> buses;
  const auto& bus_table = tables["bus"];
  for (std::size_t r = 0; r < bus_table.rows.size(); ++r) {
    const auto& row = checked_row(bus_table, r, 3, "bus");
    Bus b;
    b.id = as_bus_id(row[0], bus_table.row_lines[r]);
    b.load_mw = row[2];
    b.gen_mw = gen_mw.count(b.id) ? gen_mw[b.id] : 0.0;
    if (row[1] == 3.0)
      b.bus_class = BusClass::slack;
    else if (gen_buses.count(b.id))
      b.bus_class = BusClass::generator;
    else if (b.load_mw != 0.0)
      b.bus_class = BusClass::load;
    else
      b.bus_class = BusClass::zero_load;
    buses.push_back(b);
  }
  for (int id : gen_buses) {
    const bool known = std::any_of(buses.begin(), buses.end(), [id](const Bus& b) { return b.id == id; });
    if (!known) throw StructuralError("generator at bus " + std::to_string(id) + " missing from the bus table");
  }

  std::vector<Branch> branches;
  const auto& branch_table = tables["branch"];
  for (std::size_t r = 0; r < branch_table.rows.size(); ++r) {
    const auto& row = checked_row(branch_table, r, 4, "branch");
    const auto line = branch_table.row_lines[r];
    if (row[3] == 0.0) throw ParseError("branch reactance is zero", line);
    branches.push_back(Branch{as_bus_id(row[0], line), as_bus_id(row[1], line), 1.0 / row[3]});
  }
  return GridNetwork(*base_mva, std::move(buses), std::move(branches));
}

GridNetwork parse_grid_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ParseError(std::string("invalid JSON: ") + e.what(), line);
  }
  try {
    const double base = doc.value("base_mva", 100.0);
    std::vector<Bus> buses;
    for (const auto& jb : doc.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.bus_class = bus_class_from_string(jb.at("class").get<std::string>());
      b.load_mw = jb.value("load_mw", 0.0);
      b.gen_mw = jb.value("gen_mw", 0.0);
      buses.push_back(b);
    }
    std::vector<Branch> branches;
    for (const auto& jr : doc.at("branches"))
      branches.push_back(Branch{jr.at("from").get<int>(), jr.at("to").get<int>(), jr.at("b").get<double>()});
    return GridNetwork(base, std::move(buses), std::move(branches));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("grid JSON: ") + e.what(), 0);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("grid JSON: ") + e.what(), 0);
  }
}

GridNetwork parse_case_file(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_grid_json(text);
  return parse_matpower(text);
}

std::string to_grid_json(const GridNetwork& net) {
  nlohmann::json doc;
  doc["base_mva"] = net.base_mva();
  doc["buses"] = nlohmann::json::array();
  for (const auto& b : net.buses())
    doc["buses"].push_back(
        {{"id", b.id}, {"class", std::string(to_string(b.bus_class))}, {"load_mw", b.load_mw}, {"gen_mw", b.gen_mw}});
  doc["branches"] = nlohmann::json::array();
  for (const auto& br : net.branches())
    doc["branches"].push_back({{"from", br.from}, {"to", br.to}, {"b", br.susceptance}});
  return doc.dump(2);
}

}  // namespace gridshield
