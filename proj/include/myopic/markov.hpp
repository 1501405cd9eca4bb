#ifndef MYOPIC_MARKOV_HPP
#define MYOPIC_MARKOV_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "myopic/config.hpp"
#include "myopic/error.hpp"
#include "myopic/link_outage.hpp"
#include "myopic/parallel.hpp"
#include "myopic/state.hpp"

namespace myopic {

struct TransitionEntry {
  std::uint64_t to = 1;  // target state index l
  double p = 0.0;
};

/// Column-stochastic transition matrix stored by column: column m lists the
/// reachable states l with p_{l,m} > 0 (structural zeros are omitted).
class TransitionMatrix {
public:
  TransitionMatrix() = default;
  TransitionMatrix(std::uint64_t dim, std::vector<std::vector<TransitionEntry>> columns,
                   double power, std::string fingerprint)
      : dim_(dim), columns_(std::move(columns)), power_(power),
        fingerprint_(std::move(fingerprint)) {}

  std::uint64_t dim() const { return dim_; }
  double power() const { return power_; }
  const std::string& fingerprint() const { return fingerprint_; }

  const std::vector<TransitionEntry>& column(std::uint64_t m) const {
    return columns_.at(static_cast<std::size_t>(m - 1));
  }

  /// p_{l,m}; zero when l is not listed in column m.
  double at(std::uint64_t l, std::uint64_t m) const {
    const auto& col = column(m);
    const auto it = std::lower_bound(col.begin(), col.end(), l,
                                     [](const TransitionEntry& e, std::uint64_t v) { return e.to < v; });
    return it != col.end() && it->to == l ? it->p : 0.0;
  }

  double column_sum(std::uint64_t m) const {
    double s = 0.0;
    for (const auto& e : column(m)) s += e.p;
    return s;
  }

  std::size_t nonzeros(std::uint64_t m) const {
    std::size_t n = 0;
    for (const auto& e : column(m)) n += e.p > 0.0;
    return n;
  }

  /// y = A x.
  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t m = 0; m < columns_.size(); ++m) {
      const double xm = x[m];
      if (xm == 0.0) continue;
      for (const auto& e : columns_[m]) y[static_cast<std::size_t>(e.to - 1)] += e.p * xm;
    }
    return y;
  }

  Eigen::MatrixXd dense() const {
    const auto n = static_cast<Eigen::Index>(dim_);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t m = 0; m < columns_.size(); ++m) {
      for (const auto& e : columns_[m]) {
        a(static_cast<Eigen::Index>(e.to - 1), static_cast<Eigen::Index>(m)) = e.p;
      }
    }
    return a;
  }

private:
  std::uint64_t dim_ = 0;
  std::vector<std::vector<TransitionEntry>> columns_;
  double power_ = 0.0;
  std::string fingerprint_;
};

/// Short text identifying every parameter that affects the matrix.
inline std::string config_fingerprint(const NetworkConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "N=" << cfg.n_relays() << ";k=" << cfg.k_hops() << ";H=";
  for (int r : cfg.dual_mode()) os << r << ',';
  os << ";q=" << cfg.q_silent() << ";eta=" << cfg.eta() << ";s2=" << cfg.sigma2()
     << ";g=" << cfg.gamma() << ";pos=";
  for (double p : cfg.positions()) os << p << ',';
  os << ";a=";
  for (const auto& row : cfg.splits().rows) {
    for (double a : row) os << a << ',';
    os << '|';
  }
  return os.str();
}

/// True iff every buffer of l is the buffer of m shifted one cell right:
/// beta_{i,m}[n] = beta_{i,l}[n+1]. Relay bits and the first cells are free.
inline bool transition_exists(const StateLayout& layout, std::uint64_t m, std::uint64_t l) {
  const auto& cfg = layout.config();
  const std::uint64_t cm = m - 1;
  const std::uint64_t cl = l - 1;
  for (int i = 1; i <= cfg.n_relays(); ++i) {
    for (int n = 1; n < cfg.buffer_length(i); ++n) {
      if (layout.buffer_bit(cm, i, n) != layout.buffer_bit(cl, i, n + 1)) return false;
    }
  }
  return true;
}

/// Per-relay outage P_o(j, m) for j = 1..N, indexed by j - 1.
inline std::vector<double> relay_outages(const StateLayout& layout, const OutageCalculator& calc,
                                         std::uint64_t code, double power) {
  std::vector<double> po(static_cast<std::size_t>(layout.config().n_relays()));
  for (int j = 1; j <= layout.config().n_relays(); ++j) {
    po[static_cast<std::size_t>(j - 1)] = calc.outage_per_node(j, layout, code, power);
  }
  return po;
}

namespace detail {

// Product formula for a target l that is known to be reachable from m.
inline double reachable_probability(const StateLayout& layout, std::uint64_t cl,
                                    const std::vector<double>& po) {
  const auto& cfg = layout.config();
  const double q = cfg.q_silent();
  double p = 1.0;
  for (int r = 0; r < cfg.nu(); ++r) p *= layout.bit(cl, r) ? 1.0 - q : q;
  for (int j = 1; j <= cfg.n_relays(); ++j) {
    const double o = po[static_cast<std::size_t>(j - 1)];
    p *= layout.buffer_bit(cl, j, 1) ? 1.0 - o : o;
  }
  return p;
}

}  // namespace detail

/// p_{l,m}: zero without a valid shift, otherwise the product of the mode
/// probabilities of l and the decode outcomes of every relay given m.
inline double transition_probability(const StateLayout& layout, const OutageCalculator& calc,
                                     std::uint64_t m, std::uint64_t l, double power) {
  if (!transition_exists(layout, m, l)) return 0.0;
  return detail::reachable_probability(layout, l - 1, relay_outages(layout, calc, m - 1, power));
}

struct BuildOptions {
  unsigned workers = default_workers();
};

/// Evaluates every column by enumerating its 2^(N+nu) shift-compatible
/// targets (free first buffer cells and relay bits). Entries with zero
/// probability are dropped.
inline TransitionMatrix build_matrix(const StateLayout& layout, const OutageCalculator& calc,
                                     double power, const BuildOptions& opt = {}) {
  const auto& cfg = layout.config();
  const std::uint64_t states = layout.states();
  const int n = cfg.n_relays();
  const int nu = cfg.nu();

  // Layout positions of the free bits: relay bits, then beta_j[1].
  std::vector<int> free_shift;
  for (int r = 0; r < nu; ++r) free_shift.push_back(layout.shift_of(r));
  for (int j = 1; j <= n; ++j) free_shift.push_back(layout.shift_of(layout.buffer_pos(j, 1)));
  const std::uint64_t fanout = std::uint64_t{1} << free_shift.size();

  std::vector<std::vector<TransitionEntry>> columns(static_cast<std::size_t>(states));
  parallel_for(static_cast<std::size_t>(states), opt.workers, [&](std::size_t idx) {
    const std::uint64_t cm = idx;
    // Shifted buffers of m with empty first cells and zero relay bits.
    std::uint64_t base = 0;
    for (int i = 1; i <= n; ++i) {
      for (int c = 2; c <= cfg.buffer_length(i); ++c) {
        if (layout.buffer_bit(cm, i, c - 1)) base |= std::uint64_t{1} << layout.shift_of(layout.buffer_pos(i, c));
      }
    }
    const std::vector<double> po = relay_outages(layout, calc, cm, power);
    auto& col = columns[idx];
    col.reserve(static_cast<std::size_t>(fanout));
    for (std::uint64_t f = 0; f < fanout; ++f) {
      std::uint64_t cl = base;
      for (std::size_t b = 0; b < free_shift.size(); ++b) {
        if ((f >> b) & 1u) cl |= std::uint64_t{1} << free_shift[b];
      }
      const double p = detail::reachable_probability(layout, cl, po);
      if (p > 0.0) col.push_back({cl + 1, p});
    }
    std::sort(col.begin(), col.end(),
              [](const TransitionEntry& a, const TransitionEntry& b) { return a.to < b.to; });
  });
  return TransitionMatrix(states, std::move(columns), power, config_fingerprint(cfg));
}

/// True when the positive-entry graph is strongly connected.
inline bool is_strongly_connected(const TransitionMatrix& a) {
  const std::size_t n = static_cast<std::size_t>(a.dim());
  if (n == 0) return false;
  std::vector<std::vector<std::size_t>> fwd(n), rev(n);
  for (std::size_t m = 0; m < n; ++m) {
    for (const auto& e : a.column(m + 1)) {
      if (e.p <= 0.0) continue;
      fwd[m].push_back(static_cast<std::size_t>(e.to - 1));
      rev[static_cast<std::size_t>(e.to - 1)].push_back(m);
    }
  }
  auto reaches_all = [n](const std::vector<std::vector<std::size_t>>& g) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w : g[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == n;
  };
  return reaches_all(fwd) && reaches_all(rev);
}

/// Strong connectivity plus p_{1,1} > 0 (aperiodicity).
inline bool is_irreducible(const TransitionMatrix& a) {
  return is_strongly_connected(a) && a.at(1, 1) > 0.0;
}

struct StationaryDistribution {
  std::vector<double> pi;
  double residual = 0.0;  // ||A pi - pi||_inf
  bool direct = false;    // dense solve (true) or power iteration (false)
  bool irreducible = false;
  int iterations = 0;
  std::vector<std::uint64_t> support;  // state indices with pi > 0

  double operator[](std::uint64_t m) const { return pi.at(static_cast<std::size_t>(m - 1)); }
};

struct StationaryOptions {
  std::uint64_t dense_threshold = 4096;
  int max_iterations = 2'000'000;
  double tolerance = 1e-12;
  bool force_iterative = false;
};

inline double stationary_residual(const TransitionMatrix& a, const std::vector<double>& pi) {
  const std::vector<double> y = a.apply(pi);
  double r = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) r = std::max(r, std::abs(y[i] - pi[i]));
  return r;
}

namespace detail {

inline void finish_distribution(const TransitionMatrix& a, StationaryDistribution& s) {
  for (double& v : s.pi) {
    if (v < 0.0) {
      if (v < -1e-12) throw SingularSystemError("stationary solution has a negative entry");
      v = 0.0;
    }
  }
  const double sum = std::accumulate(s.pi.begin(), s.pi.end(), 0.0);
  for (double& v : s.pi) v /= sum;
  s.residual = stationary_residual(a, s.pi);
  s.support.clear();
  for (std::size_t i = 0; i < s.pi.size(); ++i) {
    if (s.pi[i] > 0.0) s.support.push_back(i + 1);
  }
}

inline std::vector<double> power_iteration(const TransitionMatrix& a, bool lazy,
                                           const StationaryOptions& opt, int& iterations) {
  std::vector<double> pi(static_cast<std::size_t>(a.dim()), 0.0);
  pi[0] = 1.0;
  for (iterations = 1; iterations <= opt.max_iterations; ++iterations) {
    std::vector<double> next = a.apply(pi);
    double diff = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (lazy) next[i] = 0.5 * (next[i] + pi[i]);
      sum += next[i];
    }
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] /= sum;
      diff = std::max(diff, std::abs(next[i] - pi[i]));
    }
    pi = std::move(next);
    if (diff <= opt.tolerance && stationary_residual(a, pi) <= opt.tolerance) return pi;
  }
  throw ConvergenceError("power iteration did not converge in " +
                         std::to_string(opt.max_iterations) + " iterations");
}

}  // namespace detail

/// Unique stationary distribution. Irreducible chains up to the dense
/// threshold solve (A - I + B) pi = b, where B is all ones and b = 1.
/// Larger or reducible chains (boundary outage values 0 or 1) use power
/// iteration from s_1, on the lazy chain (A + I)/2 unless the chain is
/// known to be aperiodic.
inline StationaryDistribution stationary(const TransitionMatrix& a, const StationaryOptions& opt = {}) {
  StationaryDistribution s;
  s.irreducible = is_irreducible(a);
  const auto n = static_cast<Eigen::Index>(a.dim());
  if (s.irreducible && !opt.force_iterative && a.dim() <= opt.dense_threshold) {
    Eigen::MatrixXd lhs = a.dense();
    lhs -= Eigen::MatrixXd::Identity(n, n);
    lhs.array() += 1.0;
    const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
    if (!(lu.rcond() > 1e-14)) {
      throw SingularSystemError("A - I + B is singular (rcond " + std::to_string(lu.rcond()) + ")");
    }
    const Eigen::VectorXd x = lu.solve(rhs);
    s.pi.assign(x.data(), x.data() + n);
    s.direct = true;
    s.iterations = 0;
  } else {
    s.pi = detail::power_iteration(a, !s.irreducible || a.at(1, 1) <= 0.0, opt, s.iterations);
    s.direct = false;
  }
  detail::finish_distribution(a, s);
  return s;
}

}  // namespace myopic

#endif  // MYOPIC_MARKOV_HPP
