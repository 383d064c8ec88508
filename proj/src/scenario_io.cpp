#include "amod/scenario_io.hpp"

#include <fstream>
#include <sstream>

namespace amod {
namespace {

using nlohmann::json;

template <typename M>
json matrix_to_json(const M& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) throw FormatError(key + ": expected a 2-D array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw FormatError(key + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw FormatError(key + ": non-numeric entry");
      if constexpr (std::is_integral_v<Scalar>) {
        if (!v.is_number_integer()) throw FormatError(key + ": expected integers");
      }
      m(i, c) = v.get<Scalar>();
    }
  }
  return m;
}

int array_depth(const json& j) {
  int depth = 0;
  const json* p = &j;
  while (p->is_array() && !p->empty()) {
    ++depth;
    p = &p->front();
  }
  return depth;
}

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("scenario: missing key '") + key + "'");
  return j.at(key);
}

template <typename T>
T scalar(const json& j, const char* key) {
  const json& v = require(j, key);
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw FormatError(std::string(key) + ": expected a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw FormatError(std::string(key) + ": expected an integer");
  } else {
    if (!v.is_number()) throw FormatError(std::string(key) + ": expected a number");
  }
  return v.get<T>();
}

}  // namespace

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["n_stations"] = s.network.n_stations;
  j["adjacency"] = matrix_to_json(s.network.adjacency);
  j["travel_time"] = matrix_to_json(s.network.travel_time);
  j["cost"] = matrix_to_json(s.network.cost);
  if (s.network.price.size() == 1) {
    j["price"] = matrix_to_json(s.network.price.front());
  } else {
    json bins = json::array();
    for (const auto& p : s.network.price) bins.push_back(matrix_to_json(p));
    j["price"] = std::move(bins);
  }
  json rates = json::array();
  for (const auto& r : s.rates.all_bins()) rates.push_back(matrix_to_json(r));
  j["rates"] = std::move(rates);
  j["bin_length_steps"] = s.rates.bin_length();
  j["fleet_size"] = s.fleet_size;
  j["initial_idle"] = std::vector<int>(s.initial_idle.data(), s.initial_idle.data() + s.initial_idle.size());
  j["episode_length"] = s.episode_length;
  j["time_step_minutes"] = s.time_step_minutes;
  j["planning_horizon"] = s.planning_horizon;
  return j;
}

Scenario scenario_from_json(const json& j, ValidationReport* report) {
  if (!j.is_object()) throw FormatError("scenario: top level must be an object");
  Scenario s;
  try {
    s.name = scalar<std::string>(j, "name");
    s.network.n_stations = scalar<int>(j, "n_stations");
    s.network.adjacency = matrix_from_json<int>(require(j, "adjacency"), "adjacency");
    s.network.travel_time = matrix_from_json<int>(require(j, "travel_time"), "travel_time");
    s.network.cost = matrix_from_json<double>(require(j, "cost"), "cost");
    const json& price = require(j, "price");
    if (array_depth(price) == 2) {
      s.network.price = {matrix_from_json<double>(price, "price")};
    } else if (array_depth(price) == 3) {
      for (const auto& p : price) s.network.price.push_back(matrix_from_json<double>(p, "price"));
    } else {
      throw FormatError("price: expected [[float]] or [bins][N][N]");
    }
    const json& rates = require(j, "rates");
    if (array_depth(rates) != 3) throw FormatError("rates: expected [bins][N][N]");
    std::vector<Matrix> bins;
    for (const auto& r : rates) bins.push_back(matrix_from_json<double>(r, "rates"));
    s.rates = RateTable(std::move(bins), scalar<int>(j, "bin_length_steps"));
    s.fleet_size = scalar<int>(j, "fleet_size");
    const json& idle = require(j, "initial_idle");
    if (!idle.is_array()) throw FormatError("initial_idle: expected an array");
    s.initial_idle.resize(static_cast<Eigen::Index>(idle.size()));
    for (std::size_t i = 0; i < idle.size(); ++i) {
      if (!idle[i].is_number_integer()) throw FormatError("initial_idle: expected integers");
      s.initial_idle(static_cast<Eigen::Index>(i)) = idle[i].get<int>();
    }
    s.episode_length = scalar<int>(j, "episode_length");
    s.time_step_minutes = scalar<double>(j, "time_step_minutes");
    s.planning_horizon = scalar<int>(j, "planning_horizon");
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
  ValidationReport r = validate_scenario(s);
  if (!r.valid()) throw FormatError("scenario '" + s.name + "' is invalid:\n" + r.summary());
  if (report != nullptr) *report = std::move(r);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, ValidationReport* report) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open scenario " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j, report);
}

std::string dump_scenario(const Scenario& s) { return scenario_to_json(s).dump(1) + "\n"; }

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw std::ios_base::failure("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  write_file_atomic(path, dump_scenario(s));
}

}  // namespace amod
