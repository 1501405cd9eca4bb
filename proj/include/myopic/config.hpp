#ifndef MYOPIC_CONFIG_HPP
#define MYOPIC_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "myopic/error.hpp"

namespace myopic {

/// Power-splitting weights a_{i,j}. Row i holds the weights transmitter i
/// puts on receivers i+1 .. i+L_i, in that order.
struct SplitTable {
  std::vector<std::vector<double>> rows;

  double at(int transmitter, int receiver) const {
    return rows.at(static_cast<std::size_t>(transmitter))
        .at(static_cast<std::size_t>(receiver - transmitter - 1));
  }

  friend bool operator==(const SplitTable&, const SplitTable&) = default;
};

/// Plain description of one branch, as read from a config file or built in
/// code. Converted to a validated NetworkConfig before use.
struct NetworkSpec {
  int n_relays = 2;
  int k_hops = 1;
  std::vector<int> dual_mode;  // relay indices in 1..N
  double q_silent = 0.0;
  double end_distance = 3.0;
  std::vector<double> positions;  // empty: equispaced on [0, end_distance]
  double eta = 2.0;
  double sigma2 = 1.0;
  double gamma = 1.0;  // linear SNR threshold
  std::optional<SplitTable> splits;  // empty: equal split
};

/// Number of receivers transmitter i serves: L_i = min(k, N - i + 1).
/// Also the buffer length of relay i (i >= 1); the source uses i = 0.
inline int buffer_length(int n_relays, int k_hops, int node) {
  return std::min(k_hops, n_relays - node + 1);
}

inline SplitTable equal_split_table(int n_relays, int k_hops) {
  SplitTable t;
  for (int i = 0; i <= n_relays; ++i) {
    const int len = buffer_length(n_relays, k_hops, i);
    t.rows.emplace_back(static_cast<std::size_t>(len), 1.0 / len);
  }
  return t;
}

/// Validated, immutable description of one myopic branch.
class NetworkConfig {
public:
  explicit NetworkConfig(NetworkSpec spec) : spec_(std::move(spec)) {
    validate_and_fill();
  }

  int n_relays() const { return spec_.n_relays; }
  int k_hops() const { return spec_.k_hops; }
  int destination() const { return spec_.n_relays + 1; }
  const std::vector<int>& dual_mode() const { return spec_.dual_mode; }
  int nu() const { return static_cast<int>(spec_.dual_mode.size()); }
  double q_silent() const { return spec_.q_silent; }
  double end_distance() const { return spec_.end_distance; }
  const std::vector<double>& positions() const { return spec_.positions; }
  double eta() const { return spec_.eta; }
  double sigma2() const { return spec_.sigma2; }
  double gamma() const { return spec_.gamma; }
  const SplitTable& splits() const { return *spec_.splits; }
  const NetworkSpec& spec() const { return spec_; }

  int buffer_length(int node) const {
    return myopic::buffer_length(spec_.n_relays, spec_.k_hops, node);
  }

  /// Rank of relay i inside H (0-based), or -1 for an always-active node.
  int dual_rank(int node) const { return dual_rank_[static_cast<std::size_t>(node)]; }
  bool is_dual(int node) const { return dual_rank(node) >= 0; }

  double distance(int i, int j) const {
    return std::abs(spec_.positions[static_cast<std::size_t>(j)] -
                    spec_.positions[static_cast<std::size_t>(i)]);
  }

  /// Effective amplitude-squared weight w = a_{i,j} / d_{i,j}^eta.
  double link_weight(int i, int j) const {
    return splits().at(i, j) / std::pow(distance(i, j), spec_.eta);
  }

  /// Threshold ratio tau = gamma sigma^2 / P for transmit power P.
  double tau(double power) const { return spec_.gamma * spec_.sigma2 / power; }

  bool equispaced() const {
    const double d = spec_.positions[1] - spec_.positions[0];
    for (std::size_t i = 1; i + 1 < spec_.positions.size(); ++i) {
      if (std::abs(spec_.positions[i + 1] - spec_.positions[i] - d) > 1e-12 * (1.0 + d)) {
        return false;
      }
    }
    return true;
  }

  NetworkConfig with_splits(SplitTable splits) const {
    NetworkSpec s = spec_;
    s.splits = std::move(splits);
    return NetworkConfig(std::move(s));
  }

  NetworkConfig with_q(double q) const {
    NetworkSpec s = spec_;
    s.q_silent = q;
    return NetworkConfig(std::move(s));
  }

private:
  void validate_and_fill() {
    auto& s = spec_;
    if (s.n_relays < 1) throw ConfigError("n_relays must be >= 1");
    if (s.k_hops < 1 || s.k_hops > s.n_relays + 1) {
      throw ConfigError("k_hops must satisfy 1 <= k <= N+1");
    }
    std::sort(s.dual_mode.begin(), s.dual_mode.end());
    if (std::adjacent_find(s.dual_mode.begin(), s.dual_mode.end()) != s.dual_mode.end()) {
      throw ConfigError("dual_mode contains a repeated relay");
    }
    for (int r : s.dual_mode) {
      if (r < 1 || r > s.n_relays) throw ConfigError("dual_mode relay outside 1..N");
    }
    if (!(s.q_silent >= 0.0 && s.q_silent <= 1.0)) throw ConfigError("q must lie in [0,1]");
    if (!(s.eta > 0.0)) throw ConfigError("eta must be positive");
    if (!(s.sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
    if (!(s.gamma > 0.0)) throw ConfigError("gamma must be positive");

    const auto nodes = static_cast<std::size_t>(s.n_relays + 2);
    if (s.positions.empty()) {
      if (!(s.end_distance > 0.0)) throw ConfigError("end_distance must be positive");
      const double d = s.end_distance / (s.n_relays + 1);
      s.positions.resize(nodes);
      for (std::size_t i = 0; i < nodes; ++i) s.positions[i] = d * static_cast<double>(i);
    } else {
      if (s.positions.size() != nodes) throw ConfigError("positions needs N+2 entries");
      for (std::size_t i = 0; i + 1 < nodes; ++i) {
        if (!(s.positions[i + 1] > s.positions[i])) {
          throw ConfigError("positions must be strictly increasing");
        }
      }
      s.end_distance = s.positions.back() - s.positions.front();
    }

    if (!s.splits) s.splits = equal_split_table(s.n_relays, s.k_hops);
    const auto& rows = s.splits->rows;
    if (rows.size() != static_cast<std::size_t>(s.n_relays + 1)) {
      throw ConfigError("splits needs one row per transmitter 0..N");
    }
    for (int i = 0; i <= s.n_relays; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      const int len = buffer_length(i);
      if (row.size() != static_cast<std::size_t>(len)) {
        throw ConfigError("splits row " + std::to_string(i) + " must have " +
                          std::to_string(len) + " entries");
      }
      double sum = 0.0;
      for (double a : row) {
        const bool ok = len == 1 ? (a > 0.0 && a <= 1.0) : (a > 0.0 && a < 1.0);
        if (!ok) throw ConfigError("split weights must lie in (0,1)");
        sum += a;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("splits row " + std::to_string(i) + " does not sum to 1");
      }
    }

    dual_rank_.assign(nodes, -1);
    for (std::size_t r = 0; r < s.dual_mode.size(); ++r) {
      dual_rank_[static_cast<std::size_t>(s.dual_mode[r])] = static_cast<int>(r);
    }
  }

  NetworkSpec spec_;
  std::vector<int> dual_rank_;
};

}  // namespace myopic

#endif  // MYOPIC_CONFIG_HPP
