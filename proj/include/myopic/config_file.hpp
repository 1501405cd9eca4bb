#ifndef MYOPIC_CONFIG_FILE_HPP
#define MYOPIC_CONFIG_FILE_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "myopic/config.hpp"
#include "myopic/error.hpp"
#include "myopic/link_outage.hpp"
#include "myopic/units.hpp"

namespace myopic {

enum class SplitsMode { kEqual, kOptimized, kExplicit };

inline std::string to_string(SplitsMode m) {
  switch (m) {
    case SplitsMode::kEqual: return "equal";
    case SplitsMode::kOptimized: return "optimized";
    case SplitsMode::kExplicit: return "explicit";
  }
  return "?";
}

/// Everything one experiment file describes: the branch plus run settings.
struct ExperimentConfig {
  NetworkSpec network;
  SplitsMode splits_mode = SplitsMode::kEqual;
  std::uint64_t seed = 1;
  std::uint64_t slots = 1'000'000;
  std::vector<double> power_grid_db;
  OutageMethod method = OutageMethod::kExact;
  bool simulate = false;
  int branches = 1;  // identical copies for multi-branch runs
};

namespace detail {

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": '" + s + "' is not a number");
  return v;
}

template <class Int>
Int parse_int(const std::string& s, const std::string& key) {
  Int v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": '" + s + "' is not an integer");
  return v;
}

inline std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const auto& item : split(s, ',')) {
    if (item.empty()) throw ConfigError(key + ": empty list entry");
    out.push_back(parse_double(item, key));
  }
  return out;
}

/// "a:step:b" (inclusive) or a comma list.
inline std::vector<double> parse_grid(const std::string& s, const std::string& key) {
  if (s.find(':') == std::string::npos) return parse_list(s, key);
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw ConfigError(key + ": ranges are written start:step:stop");
  const double a = parse_double(parts[0], key);
  const double step = parse_double(parts[1], key);
  const double b = parse_double(parts[2], key);
  if (!(step > 0.0) || b < a) throw ConfigError(key + ": range needs step > 0 and stop >= start");
  std::vector<double> out;
  const auto count = static_cast<int>(std::floor((b - a) / step + 1e-9));
  for (int i = 0; i <= count; ++i) out.push_back(a + step * i);
  return out;
}

inline bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError(key + ": expected true or false");
}

}  // namespace detail

inline OutageMethod parse_method(const std::string& s) {
  if (s == "exact") return OutageMethod::kExact;
  if (s == "saa") return OutageMethod::kSaa;
  if (s == "gil-pelaez") return OutageMethod::kGilPelaez;
  throw ConfigError("method must be exact, saa or gil-pelaez");
}

/// Explicit split table: rows separated by ';', weights by ','.
inline SplitTable parse_split_table(const std::string& s) {
  SplitTable t;
  for (const auto& row : detail::split(s, ';')) t.rows.push_back(detail::parse_list(row, "splits"));
  return t;
}

/// Parses the key = value format documented in the README. Lines starting
/// with '#' and blank lines are ignored; unknown or repeated keys are errors.
inline ExperimentConfig parse_experiment(std::istream& in, const std::string& origin = "config") {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (seen.count(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    seen[key] = lineno;
    try {
      auto& net = cfg.network;
      if (key == "n_relays") {
        net.n_relays = detail::parse_int<int>(value, key);
      } else if (key == "k_hops") {
        net.k_hops = detail::parse_int<int>(value, key);
      } else if (key == "dual_mode") {
        net.dual_mode.clear();
        for (double r : detail::parse_list(value, key)) {
          if (r != std::floor(r)) throw ConfigError("dual_mode entries must be integers");
          net.dual_mode.push_back(static_cast<int>(r));
        }
      } else if (key == "q") {
        net.q_silent = detail::parse_double(value, key);
      } else if (key == "end_distance") {
        net.end_distance = detail::parse_double(value, key);
      } else if (key == "positions") {
        net.positions = detail::parse_list(value, key);
      } else if (key == "eta") {
        net.eta = detail::parse_double(value, key);
      } else if (key == "sigma2") {
        net.sigma2 = detail::parse_double(value, key);
      } else if (key == "gamma_db") {
        net.gamma = db_to_linear(detail::parse_double(value, key));
      } else if (key == "splits") {
        if (value == "equal") {
          cfg.splits_mode = SplitsMode::kEqual;
        } else if (value == "optimized") {
          cfg.splits_mode = SplitsMode::kOptimized;
        } else {
          cfg.splits_mode = SplitsMode::kExplicit;
          net.splits = parse_split_table(value);
        }
      } else if (key == "seed") {
        cfg.seed = detail::parse_int<std::uint64_t>(value, key);
      } else if (key == "slots") {
        cfg.slots = detail::parse_int<std::uint64_t>(value, key);
      } else if (key == "power_grid_db") {
        cfg.power_grid_db = detail::parse_grid(value, key);
      } else if (key == "method") {
        cfg.method = parse_method(value);
      } else if (key == "simulate") {
        cfg.simulate = detail::parse_bool(value, key);
      } else if (key == "branches") {
        cfg.branches = detail::parse_int<int>(value, key);
        if (cfg.branches < 1) throw ConfigError("branches must be >= 1");
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (!std::is_sorted(cfg.power_grid_db.begin(), cfg.power_grid_db.end()) ||
      std::adjacent_find(cfg.power_grid_db.begin(), cfg.power_grid_db.end()) != cfg.power_grid_db.end()) {
    throw ConfigError(origin + ": power_grid_db must be strictly increasing");
  }
  NetworkConfig check(cfg.network);  // validates the branch
  (void)check;
  return cfg;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_experiment(in, path);
}

inline ExperimentConfig parse_experiment_string(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment(in);
}

}  // namespace myopic

#endif  // MYOPIC_CONFIG_FILE_HPP
