#include "relurec/config.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace relurec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error(ErrorCode::schema, "not a number: '" + s + "'");
  return v;
}

long long to_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error(ErrorCode::schema, "not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw Error(ErrorCode::schema, "not a boolean: '" + s + "'");
}

}  // namespace

PlantVariant parse_plant_variant(std::string_view s) {
  if (s == "linear") return PlantVariant::linear;
  if (s == "relu") return PlantVariant::relu;
  if (s == "normalized") return PlantVariant::normalized_relu_sum;
  throw Error(ErrorCode::invalid_input, "unknown plant '" + std::string(s) + "'");
}

const std::string* KeyValueConfig::find(const std::string& key) const {
  const auto it = values.find(key);
  return it == values.end() ? nullptr : &it->second;
}

KeyValueConfig parse_config(std::istream& is) {
  KeyValueConfig cfg;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::schema, "line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::schema, "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::schema, "line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    cfg.values[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot open config " + path.string());
  return parse_config(in);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const std::string& item : split(text, ',')) {
    const std::vector<std::string> parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(static_cast<int>(to_int(parts[0])));
    } else if (parts.size() == 3) {
      const long long start = to_int(parts[0]);
      const long long step = to_int(parts[1]);
      const long long stop = to_int(parts[2]);
      if (step <= 0) throw Error(ErrorCode::schema, "range step must be positive in '" + item + "'");
      for (long long v = start; v <= stop; v += step) out.push_back(static_cast<int>(v));
    } else {
      throw Error(ErrorCode::schema, "bad list item '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::schema, "empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) {
    const std::vector<std::string> parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(to_double(parts[0]));
    } else if (parts.size() == 3) {
      const double start = to_double(parts[0]);
      const double step = to_double(parts[1]);
      const double stop = to_double(parts[2]);
      if (!(step > 0.0)) throw Error(ErrorCode::schema, "range step must be positive in '" + item + "'");
      // Counting steps avoids accumulating rounding in the grid values.
      const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
      for (long i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
      throw Error(ErrorCode::schema, "bad list item '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::schema, "empty list");
  return out;
}

GridConfig grid_config_from(const KeyValueConfig& cfg, GridConfig base) {
  GridConfig g = std::move(base);
  for (const auto& [raw_key, v] : cfg.values) {
    std::string key = raw_key;
    if (key.rfind("grid.", 0) == 0) key = key.substr(5);
    try {
      if (key == "d_values" || key == "d") g.d_values = parse_int_list(v);
      else if (key == "n_values" || key == "n") g.n_values = parse_int_list(v);
      else if (key == "trials") g.trials = static_cast<int>(to_int(v));
      else if (key == "ensemble") g.ensemble = parse_matrix_kind(v);
      else if (key == "plant") g.plant.variant = parse_plant_variant(v);
      else if (key == "k") g.plant.k = static_cast<int>(to_int(v));
      else if (key == "plant_direction") {
        if (v != "random" && v != "smallest_singular") throw Error(ErrorCode::schema, "expected random or smallest_singular");
        g.plant.smallest_singular = v == "smallest_singular";
      }
      else if (key == "sigmas" || key == "sigma") g.sigmas = parse_double_list(v);
      else if (key == "program") g.program = parse_program_kind(v);
      else if (key == "metric") g.metric = parse_metric(v);
      else if (key == "seed") g.master_seed = static_cast<std::uint64_t>(to_int(v));
      else if (key == "tol") g.solver.tol = to_double(v);
      else if (key == "max_iter") g.solver.max_iter = static_cast<long>(to_int(v));
      else if (key == "success_tol") g.success_tol = to_double(v);
      else if (key == "pattern_samples") g.pattern_samples = static_cast<int>(to_int(v));
      else if (key == "budget_s") g.cell_budget_s = to_double(v);
      else if (key == "nic") g.compute_nic = to_bool(v);
      else if (key == "timing") g.record_wall_time = to_bool(v);
      else if (key == "threads") g.threads = static_cast<unsigned>(std::max<long long>(1, to_int(v)));
      else if (key == "betas" || key == "beta") g.betas = parse_double_list(v);
      else if (key == "out") g.output = v;
      else throw Error(ErrorCode::schema, "unknown key");
    } catch (const Error& e) {
      throw Error(ErrorCode::schema, "config key '" + raw_key + "': " + e.what());
    }
  }
  return g;
}

}  // namespace relurec
