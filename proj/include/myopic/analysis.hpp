#ifndef MYOPIC_ANALYSIS_HPP
#define MYOPIC_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/edmonds_karp_max_flow.hpp>

#include "myopic/config.hpp"
#include "myopic/error.hpp"
#include "myopic/link_outage.hpp"
#include "myopic/markov.hpp"
#include "myopic/state.hpp"
#include "myopic/units.hpp"

namespace myopic {

struct AnalysisOptions {
  OutageMethod method = OutageMethod::kExact;
  GilPelaezOptions quadrature{};
  StationaryOptions stationary{};
  BuildOptions build{};
  std::uint64_t state_cap = kDefaultStateCap;
};

struct SystemOutage {
  double outage = 0.0;
  StationaryDistribution pi;
  std::vector<double> destination_outage;  // P_o(N+1, m), m = 1..M
};

/// P_out = sum_m pi_m P_o(N+1, m).
inline SystemOutage system_outage_detail(const NetworkConfig& cfg, double power,
                                         const AnalysisOptions& opt = {}) {
  const StateLayout layout(cfg, opt.state_cap);
  const OutageCalculator calc(cfg, opt.method, opt.quadrature);
  const TransitionMatrix a = build_matrix(layout, calc, power, opt.build);
  SystemOutage out;
  out.pi = stationary(a, opt.stationary);
  out.destination_outage.resize(static_cast<std::size_t>(layout.states()));
  double sum = 0.0;
  for (std::uint64_t code = 0; code < layout.states(); ++code) {
    const double po = calc.outage_per_node(cfg.destination(), layout, code, power);
    out.destination_outage[static_cast<std::size_t>(code)] = po;
    sum += out.pi.pi[static_cast<std::size_t>(code)] * po;
  }
  out.outage = std::clamp(sum, 0.0, 1.0);
  return out;
}

inline double system_outage(const NetworkConfig& cfg, double power, const AnalysisOptions& opt = {}) {
  return system_outage_detail(cfg, power, opt).outage;
}

/// Orthogonal branches with selection combining: product of branch outages.
inline double multi_branch_outage(const std::vector<NetworkConfig>& branches, double power,
                                  const AnalysisOptions& opt = {}) {
  if (branches.empty()) throw ConfigError("multi-branch analysis needs at least one branch");
  double p = 1.0;
  for (const auto& b : branches) p *= system_outage(b, power, opt);
  return p;
}

/// Maximum number of edge-disjoint S -> D paths through always-active nodes,
/// with edges i -> j for 1 <= j - i <= k.
inline int diversity_order(const NetworkConfig& cfg) {
  using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS, boost::no_property,
      boost::property<boost::edge_capacity_t, int,
                      boost::property<boost::edge_residual_capacity_t, int,
                                      boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;

  const int dest = cfg.destination();
  Graph g(static_cast<std::size_t>(dest + 1));
  auto capacity = boost::get(boost::edge_capacity, g);
  auto reverse = boost::get(boost::edge_reverse, g);
  auto add = [&](int u, int v) {
    const auto e = boost::add_edge(static_cast<std::size_t>(u), static_cast<std::size_t>(v), g).first;
    const auto r = boost::add_edge(static_cast<std::size_t>(v), static_cast<std::size_t>(u), g).first;
    capacity[e] = 1;
    capacity[r] = 0;
    reverse[e] = r;
    reverse[r] = e;
  };
  for (int i = 0; i < dest; ++i) {
    if (i > 0 && cfg.is_dual(i)) continue;
    for (int j = i + 1; j <= std::min(dest, i + cfg.k_hops()); ++j) {
      if (j < dest && cfg.is_dual(j)) continue;
      add(i, j);
    }
  }
  const long flow = boost::edmonds_karp_max_flow(g, 0, static_cast<std::size_t>(dest));
  return static_cast<int>(flow);
}

/// delta*(rho) = (1 - rho) delta*(0) on [0, 1].
struct DmtCurve {
  int diversity = 0;

  double operator()(double rho) const {
    if (rho < 0.0 || rho > 1.0) throw Error("multiplexing gain must lie in [0,1]");
    return (1.0 - rho) * diversity;
  }
};

inline DmtCurve dmt(const NetworkConfig& cfg) { return {diversity_order(cfg)}; }

inline DmtCurve multi_branch_dmt(const std::vector<NetworkConfig>& branches) {
  if (branches.empty()) throw ConfigError("multi-branch analysis needs at least one branch");
  DmtCurve c;
  for (const auto& b : branches) c.diversity += diversity_order(b);
  return c;
}

namespace detail {

inline double floor_recursion(int n, int k, double q) {
  if (n == k) return std::pow(q, k);  // includes e(0,0) = 1
  const double qk = std::pow(q, k);
  return qk * floor_recursion(n - 2, k - 1, q) + (1.0 - qk) * floor_recursion(n - 1, k, q);
}

}  // namespace detail

/// High-power outage floor e(N, k) when every relay is dual-mode.
inline double outage_floor(int n_relays, int k_hops, double q) {
  if (k_hops < 1 || n_relays < 1) throw ConfigError("outage floor needs N >= 1 and k >= 1");
  if (k_hops == n_relays + 1) {
    throw ConfigError("k = N+1 keeps the direct link, so there is no outage floor");
  }
  if (k_hops > n_relays) throw ConfigError("outage floor needs k <= N");
  if (n_relays > 2 * k_hops) throw ConfigError("outage floor closed form covers N <= 2k only");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q must lie in [0,1]");
  return detail::floor_recursion(n_relays, k_hops, q);
}

/// Dual-mode placement test for target diversity epsilon:
/// k - eps <= nu <= ceil(N/k)(k - eps) and every window of k consecutive
/// relays holds at most k - eps dual-mode relays.
inline bool deployment_check(const NetworkConfig& cfg, int epsilon) {
  const int n = cfg.n_relays();
  const int k = cfg.k_hops();
  if (epsilon < 1 || epsilon > k - 1) throw ConfigError("epsilon must satisfy 1 <= eps <= k-1");
  const int budget = k - epsilon;
  const int nu = cfg.nu();
  const int windows = (n + k - 1) / k;
  if (nu < budget || nu > windows * budget) return false;
  for (int start = 1; start + k - 1 <= n; ++start) {
    int count = 0;
    for (int r = start; r < start + k; ++r) count += cfg.is_dual(r);
    if (count > budget) return false;
  }
  if (n < k) {
    int count = 0;
    for (int r = 1; r <= n; ++r) count += cfg.is_dual(r);
    if (count > budget) return false;
  }
  return true;
}

/// One row of an outage-versus-power curve. Optional fields are left empty
/// when the corresponding evaluation was not requested.
struct OutageRecord {
  double p_db = 0.0;
  double analytic = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> saa;
  std::optional<double> benchmark;
  std::optional<double> sim;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::string splits_mode = "equal";
};

using OutageCurve = std::vector<OutageRecord>;

/// Minus the least-squares slope of log10(outage) against log10(P) over the
/// points with lo_db <= P_dB <= hi_db.
inline double estimate_slope(const std::vector<double>& p_db, const std::vector<double>& outage,
                             double lo_db, double hi_db) {
  if (p_db.size() != outage.size()) throw Error("slope fit needs matching power and outage lists");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < p_db.size(); ++i) {
    if (p_db[i] < lo_db - 1e-9 || p_db[i] > hi_db + 1e-9) continue;
    if (!(outage[i] > 0.0)) throw Error("slope fit window contains a zero outage");
    xs.push_back(p_db[i] / 10.0);  // log10 P relative to sigma^2
    ys.push_back(std::log10(outage[i]));
  }
  if (xs.size() < 3) throw Error("slope fit needs at least three points in the window");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return -sxy / sxx;
}

inline double estimate_slope(const OutageCurve& curve, double lo_db, double hi_db) {
  std::vector<double> p, o;
  for (const auto& r : curve) {
    p.push_back(r.p_db);
    o.push_back(r.analytic);
  }
  return estimate_slope(p, o, lo_db, hi_db);
}

}  // namespace myopic

#endif  // MYOPIC_ANALYSIS_HPP
