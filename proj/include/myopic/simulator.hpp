#ifndef MYOPIC_SIMULATOR_HPP
#define MYOPIC_SIMULATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "myopic/config.hpp"
#include "myopic/parallel.hpp"
#include "myopic/rng.hpp"
#include "myopic/state.hpp"

namespace myopic {

/// Live protocol state at the start of a slot: the modes that will be used
/// for this slot's transmissions and the buffer contents.
struct SimState {
  std::vector<std::uint8_t> mode;                  // lambda per node 0..N (1 if always active)
  std::vector<std::vector<std::uint8_t>> buffers;  // buffers[i] = b_i[1..L_i], i = 1..N
  std::uint64_t slot = 0;
  std::uint64_t outages = 0;  // destination failures counted so far
  std::uint64_t decoded = 0;  // destination successes counted so far
  std::vector<std::uint8_t> success;  // scratch: decode outcome per receiver
};

enum class PhaseOrder {
  kShiftThenDecode,  // transmission, shift, decode
  kDecodeThenShift,  // wrong order; kept as a mutation check
};

/// Slot-level Monte Carlo of the protocol. Every slot draws k channel gains
/// per receiver, in receiver-major order, whether or not the link carries a
/// signal, followed by one mode draw per dual-mode relay. The draw sequence
/// therefore depends only on the seed, which gives common random numbers
/// across transmit powers.
class ProtocolSimulator {
public:
  ProtocolSimulator(const NetworkConfig& cfg, double power,
                    PhaseOrder order = PhaseOrder::kShiftThenDecode)
      : cfg_(cfg), tau_(cfg.tau(power)), order_(order) {
    const int dest = cfg.destination();
    const int k = cfg.k_hops();
    amplitude_.assign(static_cast<std::size_t>((dest + 1) * k), 0.0);
    for (int j = 1; j <= dest; ++j) {
      for (int d = 1; d <= k && j - d >= 0; ++d) {
        amplitude_[index(j, d)] = std::sqrt(cfg.link_weight(j - d, j));
      }
    }
  }

  const NetworkConfig& config() const { return cfg_; }

  /// State s_m of the chain as a simulator state.
  SimState state_from_index(const StateLayout& layout, std::uint64_t m) const {
    const NetworkState s = layout.decode(m);
    SimState out;
    out.mode.assign(static_cast<std::size_t>(cfg_.n_relays() + 1), 1);
    for (int r = 0; r < cfg_.nu(); ++r) {
      out.mode[static_cast<std::size_t>(cfg_.dual_mode()[static_cast<std::size_t>(r)])] =
          s.relay_bits[static_cast<std::size_t>(r)];
    }
    out.buffers.emplace_back();
    for (const auto& b : s.buffers) out.buffers.push_back(b);
    return out;
  }

  /// Empty buffers; dual-mode relays draw their first mode from rng.
  SimState initial_state(RandomStream& rng) const {
    SimState s;
    s.mode.assign(static_cast<std::size_t>(cfg_.n_relays() + 1), 1);
    s.buffers.emplace_back();
    for (int i = 1; i <= cfg_.n_relays(); ++i) {
      s.buffers.emplace_back(static_cast<std::size_t>(cfg_.buffer_length(i)), 0);
    }
    draw_modes(s, rng);
    return s;
  }

  /// Index m of the chain state matching s.
  std::uint64_t snapshot(const StateLayout& layout, const SimState& s) const {
    NetworkState ns;
    for (int r : cfg_.dual_mode()) ns.relay_bits.push_back(s.mode[static_cast<std::size_t>(r)]);
    ns.buffers.assign(s.buffers.begin() + 1, s.buffers.end());
    return layout.encode(ns);
  }

  /// Runs one slot and returns true when the destination decodes.
  bool step(SimState& s, RandomStream& rng) const {
    const int dest = cfg_.destination();
    const int k = cfg_.k_hops();
    const double threshold = std::sqrt(tau_);

    // Transmission: coherent amplitude sum at every receiver.
    auto& success = s.success;
    success.assign(static_cast<std::size_t>(dest + 1), 0);
    for (int j = 1; j <= dest; ++j) {
      double sum = 0.0;
      bool any = false;
      for (int d = 1; d <= k; ++d) {
        const double gain = rng.exponential();
        const int i = j - d;
        if (i < 0 || !carries(s, i, j)) continue;
        any = true;
        sum += amplitude_[index(j, d)] * std::sqrt(gain);
      }
      success[static_cast<std::size_t>(j)] = any && sum >= threshold;
    }

    if (order_ == PhaseOrder::kShiftThenDecode) {
      shift(s);
      decode(s);
    } else {
      decode(s);
      shift(s);
    }

    const bool ok = success[static_cast<std::size_t>(dest)] != 0;
    ++s.slot;
    if (ok) {
      ++s.decoded;
    } else {
      ++s.outages;
    }
    draw_modes(s, rng);
    return ok;
  }

private:
  std::size_t index(int j, int d) const {
    return static_cast<std::size_t>(j * cfg_.k_hops() + d - 1);
  }

  bool carries(const SimState& s, int i, int j) const {
    if (i == 0) return true;
    return s.mode[static_cast<std::size_t>(i)] &&
           s.buffers[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - i - 1)];
  }

  static void shift(SimState& s) {
    for (std::size_t i = 1; i < s.buffers.size(); ++i) {
      auto& b = s.buffers[i];
      for (std::size_t n = b.size(); n-- > 1;) b[n] = b[n - 1];
      b[0] = 0;
    }
  }

  void decode(SimState& s) const {
    for (int j = 1; j <= cfg_.n_relays(); ++j) {
      s.buffers[static_cast<std::size_t>(j)][0] = s.success[static_cast<std::size_t>(j)];
    }
  }

  void draw_modes(SimState& s, RandomStream& rng) const {
    const double active = 1.0 - cfg_.q_silent();
    for (int r : cfg_.dual_mode()) s.mode[static_cast<std::size_t>(r)] = rng.bernoulli(active);
  }

  NetworkConfig cfg_;
  double tau_;
  PhaseOrder order_;
  std::vector<double> amplitude_;  // sqrt(w_{j-d,j}) at index(j, d)
};

struct SimOptions {
  std::uint64_t slots = 1'000'000;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> warmup;  // default N + k
  unsigned replicas = 8;                // fixed, so results do not depend on workers
  unsigned batches_per_replica = 50;
  double confidence = 0.99;
  bool histogram = false;
  PhaseOrder order = PhaseOrder::kShiftThenDecode;
  unsigned workers = default_workers();
  std::uint64_t state_cap = kDefaultStateCap;
};

struct SimResult {
  std::uint64_t slots = 0;
  std::uint64_t outages = 0;
  double outage = 0.0;
  // Binomial interval: z sqrt(p(1-p)/n).
  double half_width = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  // Batch-means interval, which accounts for correlation between slots.
  std::uint64_t batches = 0;
  double batch_half_width = 0.0;
  double batch_ci_low = 0.0;
  double batch_ci_high = 0.0;
  // Filled when SimOptions::histogram is set: per-state slot counts and the
  // batch-means standard error of each state's frequency.
  std::vector<std::uint64_t> occupancy;
  std::vector<double> occupancy_se;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

namespace detail {

struct ReplicaTally {
  std::uint64_t slots = 0;
  std::uint64_t outages = 0;
  std::vector<double> batch_rate;                   // outage rate per batch
  std::vector<std::uint64_t> occupancy;
  std::vector<std::vector<std::uint64_t>> batch_occupancy;  // sparse would do; M is small here
  std::vector<std::uint64_t> batch_size;
};

inline ReplicaTally run_replica(const ProtocolSimulator& sim, const StateLayout* layout,
                                std::uint64_t slots, std::uint64_t warmup, unsigned batches,
                                RandomStream rng) {
  ReplicaTally t;
  SimState s = sim.initial_state(rng);
  for (std::uint64_t w = 0; w < warmup; ++w) sim.step(s, rng);
  const std::size_t states = layout ? static_cast<std::size_t>(layout->states()) : 0;
  if (layout) t.occupancy.assign(states, 0);
  std::uint64_t done = 0;
  for (unsigned b = 0; b < batches; ++b) {
    const std::uint64_t end = slots * (b + 1) / batches;
    const std::uint64_t size = end - done;
    std::uint64_t fails = 0;
    std::vector<std::uint64_t> occ;
    if (layout) occ.assign(states, 0);
    for (; done < end; ++done) {
      if (layout) ++occ[static_cast<std::size_t>(sim.snapshot(*layout, s) - 1)];
      fails += !sim.step(s, rng);
    }
    t.outages += fails;
    if (size > 0) {
      t.batch_rate.push_back(static_cast<double>(fails) / static_cast<double>(size));
      t.batch_size.push_back(size);
      if (layout) {
        for (std::size_t i = 0; i < states; ++i) t.occupancy[i] += occ[i];
        t.batch_occupancy.push_back(std::move(occ));
      }
    }
  }
  t.slots = slots;
  return t;
}

inline double batch_half_width(const std::vector<double>& values, double confidence) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return boost::math::quantile(dist, 0.5 + 0.5 * confidence) * se;
}

}  // namespace detail

/// Simulates `slots` counted slots split over a fixed number of replicas,
/// each with its own derived RNG stream and warm-up. Identical inputs give
/// identical results regardless of the worker count.
inline SimResult simulate(const NetworkConfig& cfg, double power, const SimOptions& opt = {}) {
  if (opt.slots < 1 || opt.replicas < 1 || opt.batches_per_replica < 1) {
    throw Error("simulation needs positive slots, replicas and batches");
  }
  const ProtocolSimulator sim(cfg, power, opt.order);
  std::optional<StateLayout> layout;
  if (opt.histogram) layout.emplace(cfg, opt.state_cap);
  const std::uint64_t warmup = opt.warmup.value_or(
      static_cast<std::uint64_t>(cfg.n_relays() + cfg.k_hops()));

  std::vector<detail::ReplicaTally> tallies(opt.replicas);
  parallel_for(opt.replicas, opt.workers, [&](std::size_t r) {
    const std::uint64_t lo = opt.slots * r / opt.replicas;
    const std::uint64_t hi = opt.slots * (r + 1) / opt.replicas;
    tallies[r] = detail::run_replica(sim, layout ? &*layout : nullptr, hi - lo, warmup,
                                     opt.batches_per_replica, RandomStream(opt.seed, r));
  });

  SimResult res;
  std::vector<double> rates;
  for (const auto& t : tallies) {
    res.slots += t.slots;
    res.outages += t.outages;
    rates.insert(rates.end(), t.batch_rate.begin(), t.batch_rate.end());
  }
  const double n = static_cast<double>(res.slots);
  res.outage = static_cast<double>(res.outages) / n;
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * opt.confidence);
  res.half_width = z * std::sqrt(res.outage * (1.0 - res.outage) / n);
  res.ci_low = std::max(0.0, res.outage - res.half_width);
  res.ci_high = std::min(1.0, res.outage + res.half_width);
  res.batches = rates.size();
  res.batch_half_width = detail::batch_half_width(rates, opt.confidence);
  res.batch_ci_low = std::max(0.0, res.outage - res.batch_half_width);
  res.batch_ci_high = std::min(1.0, res.outage + res.batch_half_width);

  if (layout) {
    const std::size_t states = static_cast<std::size_t>(layout->states());
    res.occupancy.assign(states, 0);
    for (const auto& t : tallies) {
      for (std::size_t i = 0; i < states; ++i) res.occupancy[i] += t.occupancy[i];
    }
    // Batch-means standard error of each frequency.
    res.occupancy_se.assign(states, 0.0);
    std::vector<double> freq;
    for (std::size_t i = 0; i < states; ++i) {
      freq.clear();
      for (const auto& t : tallies) {
        for (std::size_t b = 0; b < t.batch_occupancy.size(); ++b) {
          freq.push_back(static_cast<double>(t.batch_occupancy[b][i]) /
                         static_cast<double>(t.batch_size[b]));
        }
      }
      double mean = 0.0;
      for (double f : freq) mean += f;
      mean /= static_cast<double>(freq.size());
      double ss = 0.0;
      for (double f : freq) ss += (f - mean) * (f - mean);
      const double m = static_cast<double>(freq.size());
      res.occupancy_se[i] = m > 1 ? std::sqrt(ss / (m - 1) / m) : 0.0;
    }
  }
  return res;
}

/// Per-state occupancy frequencies with their batch-means standard errors.
struct Occupancy {
  std::vector<double> frequency;
  std::vector<double> standard_error;
};

inline Occupancy occupancy_histogram(const NetworkConfig& cfg, double power, SimOptions opt) {
  opt.histogram = true;
  const SimResult r = simulate(cfg, power, opt);
  Occupancy o;
  for (std::size_t i = 0; i < r.occupancy.size(); ++i) {
    o.frequency.push_back(static_cast<double>(r.occupancy[i]) / static_cast<double>(r.slots));
  }
  o.standard_error = r.occupancy_se;
  return o;
}

}  // namespace myopic

#endif  // MYOPIC_SIMULATOR_HPP
