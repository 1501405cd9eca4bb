#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "myopic/analysis.hpp"
#include "myopic/simulator.hpp"
#include "myopic/units.hpp"

using namespace myopic;

namespace {

NetworkConfig make(int n, int k, std::vector<int> dual = {}, double q = 0.0, double gamma = 1.0) {
  NetworkSpec s;
  s.n_relays = n;
  s.k_hops = k;
  s.dual_mode = std::move(dual);
  s.q_silent = q;
  s.end_distance = 3.0;
  s.gamma = gamma;
  return NetworkConfig(s);
}

SimOptions small(std::uint64_t slots, std::uint64_t seed = 1) {
  SimOptions o;
  o.slots = slots;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("random streams", "[sim]") {
  RandomStream a(1, 2), b(1, 2), c(1, 3);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(a.uniform() != c.uniform());
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));

  RandomStream e(9);
  double sum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) sum += e.exponential();
  CHECK(std::abs(sum / n - 1.0) < 5.0 / std::sqrt(n));
}

TEST_CASE("simulation is deterministic", "[sim]") {
  const NetworkConfig cfg = make(2, 2, {1}, 0.2);
  SimOptions o = small(200'000, 17);
  o.histogram = true;
  const SimResult a = simulate(cfg, 20.0, o);
  o.workers = 1;
  const SimResult b = simulate(cfg, 20.0, o);
  CHECK(a == b);
  o.seed = 18;
  CHECK_FALSE(simulate(cfg, 20.0, o) == a);
}

TEST_CASE("simulated outage matches the analytic value", "[sim]") {
  const NetworkConfig cfg = make(2, 2);
  const double power = db_to_linear(20.0);
  const SimResult r = simulate(cfg, power, small(1'000'000));
  const double analytic = system_outage(cfg, power);
  CHECK(r.ci_low <= analytic);
  CHECK(analytic <= r.ci_high);
  CHECK(r.slots == 1'000'000);
  CHECK(r.ci_low <= r.outage);
  CHECK(r.outage <= r.ci_high);
}

TEST_CASE("silent relays starve the destination", "[sim]") {
  const SimResult r = simulate(make(2, 2, {1, 2}, 1.0), 1e6, small(50'000));
  CHECK(r.outage == 1.0);
  CHECK(r.outages == r.slots);
}

TEST_CASE("a vanishing threshold decodes every slot", "[sim]") {
  const SimResult r = simulate(make(3, 2, {}, 0.0, 1e-300), 1.0, small(50'000));
  CHECK(r.outages == 0);
}

TEST_CASE("outage floor is reached in simulation", "[sim]") {
  const SimResult r = simulate(make(2, 2, {1, 2}, 0.1), db_to_linear(40.0), small(1'000'000));
  CHECK(std::abs(r.outage - 0.01) < 5.0 * std::sqrt(0.01 * 0.99 / 1e6) + 1e-4);

  const SimResult r3 = simulate(make(3, 2, {1, 2, 3}, 0.1), db_to_linear(40.0), small(2'000'000));
  CHECK(std::abs(r3.outage - 0.0109) < r3.batch_half_width + 1e-4);
}

TEST_CASE("swapping shift and decode changes the protocol", "[sim]") {
  const NetworkConfig cfg = make(2, 2);
  const double power = db_to_linear(10.0);
  SimOptions o = small(1'000'000);
  const SimResult right = simulate(cfg, power, o);
  o.order = PhaseOrder::kDecodeThenShift;
  const SimResult wrong = simulate(cfg, power, o);
  const double analytic = system_outage(cfg, power);
  CHECK(std::abs(right.outage - analytic) <= right.half_width);
  CHECK(std::abs(wrong.outage - analytic) > 10.0 * wrong.half_width);
}

TEST_CASE("common random numbers give monotone outage counts", "[sim]") {
  const NetworkConfig cfg = make(3, 2, {2}, 0.2);
  std::uint64_t prev = ~std::uint64_t{0};
  for (double db = 0.0; db <= 30.0; db += 5.0) {
    const SimResult r = simulate(cfg, db_to_linear(db), small(100'000, 4));
    CHECK(r.outages <= prev);
    prev = r.outages;
  }
}

TEST_CASE("snapshots are valid chain states", "[sim]") {
  const NetworkConfig cfg = make(3, 2, {1, 3}, 0.3);
  const StateLayout layout(cfg);
  const ProtocolSimulator sim(cfg, db_to_linear(8.0));
  RandomStream rng(2);
  SimState s = sim.initial_state(rng);
  CHECK(sim.snapshot(layout, s) <= 4 * 8);  // buffers empty
  for (int t = 0; t < 10'000; ++t) {
    sim.step(s, rng);
    const std::uint64_t m = sim.snapshot(layout, s);
    REQUIRE(m >= 1);
    REQUIRE(m <= layout.states());
    const SimState back = sim.state_from_index(layout, m);
    CHECK(back.mode == s.mode);
    CHECK(back.buffers == s.buffers);
  }
  CHECK(s.slot == 10'000);
  CHECK(s.outages + s.decoded == 10'000);
}

TEST_CASE("occupancy concentrates on the full state at high power", "[sim]") {
  const NetworkConfig cfg = make(2, 2);
  const Occupancy hi = occupancy_histogram(cfg, db_to_linear(50.0), small(100'000));
  CHECK(hi.frequency.back() > 0.999);
  const Occupancy lo = occupancy_histogram(cfg, db_to_linear(0.0), small(100'000));
  CHECK(lo.frequency.front() > 0.0);
  double sum = 0.0;
  for (double f : lo.frequency) sum += f;
  CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("occupancy matches the stationary distribution", "[sim]") {
  const NetworkConfig cfg = make(2, 2, {2}, 0.25);
  const double power = db_to_linear(12.0);
  const auto pi = system_outage_detail(cfg, power).pi;
  const Occupancy occ = occupancy_histogram(cfg, power, small(1'000'000, 5));
  for (std::size_t i = 0; i < pi.pi.size(); ++i) {
    const double se = std::max(occ.standard_error[i], 1e-6);
    CHECK(std::abs(occ.frequency[i] - pi.pi[i]) <= 4.0 * se);
  }
}

TEST_CASE("simulator rejects empty runs", "[sim]") {
  CHECK_THROWS(simulate(make(2, 2), 10.0, small(0)));
}
