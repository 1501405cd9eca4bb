#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>

#include "myopic/markov.hpp"
#include "myopic/rng.hpp"
#include "myopic/simulator.hpp"
#include "myopic/units.hpp"

using namespace myopic;

namespace {

NetworkConfig make(int n, int k, std::vector<int> dual = {}, double q = 0.0) {
  NetworkSpec s;
  s.n_relays = n;
  s.k_hops = k;
  s.dual_mode = std::move(dual);
  s.q_silent = q;
  s.end_distance = 3.0;
  return NetworkConfig(s);
}

// N=2, k=2, no dual-mode relays: code = b1[1] b1[2] b2[1] as bits 2,1,0.
int b11(std::uint64_t m) { return static_cast<int>(((m - 1) >> 2) & 1); }
int b12(std::uint64_t m) { return static_cast<int>(((m - 1) >> 1) & 1); }
int b21(std::uint64_t m) { return static_cast<int>((m - 1) & 1); }

}  // namespace

TEST_CASE("transition existence", "[markov]") {
  const StateLayout layout(make(2, 2));
  CHECK(transition_exists(layout, 1, 1));
  CHECK_FALSE(transition_exists(layout, 1, 3));
  for (std::uint64_t m = 1; m <= 8; ++m) {
    for (std::uint64_t l = 1; l <= 8; ++l) {
      CHECK(transition_exists(layout, m, l) == (b11(m) == b12(l)));
    }
  }
  // beta_1 = (1, 0) forces beta_1[2] = 1 in the target.
  const std::uint64_t m = 5;
  for (std::uint64_t l = 1; l <= 8; ++l) {
    if (transition_exists(layout, m, l)) CHECK(b12(l) == 1);
  }
}

TEST_CASE("two-factor transition formula", "[markov]") {
  const NetworkConfig cfg = make(2, 2);
  const StateLayout layout(cfg);
  const OutageCalculator calc(cfg);
  const double power = db_to_linear(10.0);
  const double tau = 1.0 / power;
  // Hand enumeration of the per-relay outages.
  const double po1 = -std::expm1(-tau / 0.5);  // S -> R1: a = 1/2, d = 1
  for (std::uint64_t m = 1; m <= 8; ++m) {
    LinkPattern feeders;
    feeders.tau = tau;
    feeders.weights = {0.5 / 4.0};  // S -> R2: a = 1/2, d = 2
    if (b11(m)) feeders.weights.push_back(0.5);  // R1 -> R2: a = 1/2, d = 1
    const double po2 = feeders.count() == 1 ? -std::expm1(-tau / feeders.weights[0])
                                            : outage_gil_pelaez(feeders);
    for (std::uint64_t l = 1; l <= 8; ++l) {
      double expected = 0.0;
      if (b11(m) == b12(l)) {
        expected = (b11(l) ? 1 - po1 : po1) * (b21(l) ? 1 - po2 : po2);
      }
      CHECK(std::abs(transition_probability(layout, calc, m, l, power) - expected) < 1e-15);
    }
  }
}

TEST_CASE("per-node outage structure", "[markov]") {
  const NetworkConfig cfg = make(2, 2);
  const StateLayout layout(cfg);
  const OutageCalculator calc(cfg);
  const double power = 50.0;
  const double first = calc.outage_per_node(1, layout, std::uint64_t{0}, power);
  for (std::uint64_t code = 0; code < 8; ++code) {
    CHECK(calc.outage_per_node(1, layout, code, power) == first);
  }
  for (std::uint64_t code = 0; code < 4; ++code) {
    CHECK(calc.outage_per_node(3, layout, code, power) == calc.outage_per_node(3, layout, code + 4, power));
  }
  CHECK(calc.outage_per_node(3, layout, std::uint64_t{0}, power) == 1.0);
}

TEST_CASE("built matrix structure", "[markov]") {
  for (const auto& cfg : {make(2, 2), make(2, 2, {1}, 0.2), make(3, 2, {1, 3}, 0.1), make(2, 3), make(3, 3, {2}, 0.3)}) {
    const StateLayout layout(cfg);
    const OutageCalculator calc(cfg);
    const TransitionMatrix a = build_matrix(layout, calc, db_to_linear(12.0));
    const std::size_t bound = std::size_t{1} << (cfg.nu() + cfg.n_relays());
    for (std::uint64_t m = 1; m <= a.dim(); ++m) {
      CHECK(std::abs(a.column_sum(m) - 1.0) < 1e-14);
      CHECK(a.nonzeros(m) <= bound);
      for (const auto& e : a.column(m)) CHECK(transition_exists(layout, m, e.to));
    }
  }
  // Exact zero pattern for N=2, k=2.
  const NetworkConfig cfg = make(2, 2);
  const StateLayout layout(cfg);
  const Eigen::MatrixXd dense = build_matrix(layout, OutageCalculator(cfg), 20.0).dense();
  for (int l = 1; l <= 8; ++l) {
    for (int m = 1; m <= 8; ++m) {
      CHECK((dense(l - 1, m - 1) > 0.0) == (b11(static_cast<std::uint64_t>(m)) == b12(static_cast<std::uint64_t>(l))));
    }
  }
}

TEST_CASE("q = 0 puts no mass on silent modes", "[markov]") {
  const NetworkConfig cfg = make(3, 2, {1, 2}, 0.0);
  const StateLayout layout(cfg);
  const TransitionMatrix a = build_matrix(layout, OutageCalculator(cfg), 10.0);
  for (std::uint64_t m = 1; m <= a.dim(); ++m) {
    for (const auto& e : a.column(m)) {
      CHECK(layout.bit(e.to - 1, 0) == 1);
      CHECK(layout.bit(e.to - 1, 1) == 1);
    }
  }
}

TEST_CASE("matrix build is independent of worker count", "[markov]") {
  const NetworkConfig cfg = make(3, 2, {2}, 0.1);
  const StateLayout layout(cfg);
  const OutageCalculator calc(cfg);
  const TransitionMatrix one = build_matrix(layout, calc, 30.0, BuildOptions{1});
  const TransitionMatrix four = build_matrix(layout, OutageCalculator(cfg), 30.0, BuildOptions{4});
  for (std::uint64_t m = 1; m <= one.dim(); ++m) {
    REQUIRE(one.column(m).size() == four.column(m).size());
    for (std::size_t i = 0; i < one.column(m).size(); ++i) {
      CHECK(one.column(m)[i].to == four.column(m)[i].to);
      CHECK(one.column(m)[i].p == four.column(m)[i].p);
    }
  }
  CHECK(one.fingerprint() == four.fingerprint());
}

TEST_CASE("stationary distribution of a symmetric two-state chain", "[markov]") {
  std::vector<std::vector<TransitionEntry>> cols{{{1, 0.5}, {2, 0.5}}, {{1, 0.5}, {2, 0.5}}};
  const TransitionMatrix a(2, cols, 1.0, "two-state");
  const auto s = stationary(a);
  CHECK(s.pi[0] == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(s.pi[1] == Catch::Approx(0.5).epsilon(1e-15));
  StationaryOptions it;
  it.force_iterative = true;
  const auto si = stationary(a, it);
  CHECK(si.pi[0] == Catch::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(si.direct);
}

TEST_CASE("stationary distribution solvers agree", "[markov]") {
  for (const auto& cfg : {make(2, 2), make(3, 2, {1, 3}, 0.1), make(2, 3, {1}, 0.4)}) {
    const StateLayout layout(cfg);
    const TransitionMatrix a = build_matrix(layout, OutageCalculator(cfg), db_to_linear(15.0));
    const auto direct = stationary(a);
    StationaryOptions opt;
    opt.force_iterative = true;
    const auto iter = stationary(a, opt);
    CHECK(direct.direct);
    CHECK(direct.irreducible);
    CHECK(direct.residual < 1e-12);
    double mass = 0.0;
    for (std::size_t i = 0; i < direct.pi.size(); ++i) {
      CHECK(std::abs(direct.pi[i] - iter.pi[i]) < 1e-9);
      CHECK(direct.pi[i] >= 0.0);
      mass += direct.pi[i];
    }
    CHECK(std::abs(mass - 1.0) < 1e-12);
  }
}

TEST_CASE("stationary mass moves to the full state at high power", "[markov]") {
  const NetworkConfig cfg = make(2, 2);
  const StateLayout layout(cfg);
  const auto pi = stationary(build_matrix(layout, OutageCalculator(cfg), db_to_linear(60.0)));
  CHECK(pi[8] > 0.9999);
}

TEST_CASE("reducible chain falls back to power iteration", "[markov]") {
  // q = 0 makes every state with a silent relay transient.
  const NetworkConfig cfg = make(2, 2, {1}, 0.0);
  const StateLayout layout(cfg);
  const TransitionMatrix a = build_matrix(layout, OutageCalculator(cfg), 20.0);
  CHECK_FALSE(is_irreducible(a));
  const auto s = stationary(a);
  CHECK_FALSE(s.direct);
  CHECK(s.residual < 1e-10);
  for (std::uint64_t m = 1; m <= 8; ++m) CHECK(s[m] < 1e-12);  // relay bit 0, transient
}

TEST_CASE("one-step simulator frequencies match matrix columns", "[markov]") {
  const NetworkConfig cfg = make(2, 2, {1}, 0.3);
  const StateLayout layout(cfg);
  const double power = db_to_linear(8.0);
  const TransitionMatrix a = build_matrix(layout, OutageCalculator(cfg), power);
  const ProtocolSimulator sim(cfg, power);
  const int trials = 1'000'000;
  for (std::uint64_t m : {std::uint64_t{1}, std::uint64_t{6}, std::uint64_t{13}, std::uint64_t{16}}) {
    RandomStream rng(3, m);
    std::map<std::uint64_t, int> counts;
    for (int t = 0; t < trials; ++t) {
      SimState s = sim.state_from_index(layout, m);
      sim.step(s, rng);
      ++counts[sim.snapshot(layout, s)];
    }
    // Entry-wise bound widened from 3 to 4 standard errors for the ~60
    // simultaneous comparisons, plus a chi-square test per column.
    double chi2 = 0.0;
    int cells = 0;
    for (std::uint64_t l = 1; l <= layout.states(); ++l) {
      const double p = a.at(l, m);
      const double f = counts[l] / static_cast<double>(trials);
      if (p == 0.0) {
        CHECK(counts[l] == 0);
      } else {
        CHECK(std::abs(f - p) <= 4.0 * std::sqrt(p * (1 - p) / trials));
        chi2 += (counts[l] - trials * p) * (counts[l] - trials * p) / (trials * p);
        ++cells;
      }
    }
    const boost::math::chi_squared dist(cells - 1);
    CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 1e-3);
  }
}
