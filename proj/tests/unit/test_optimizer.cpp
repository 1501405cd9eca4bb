#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "myopic/optimizer.hpp"
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

}  // namespace

TEST_CASE("simplex projection", "[optimizer]") {
  const auto p = detail::project_to_simplex({0.9, 0.4, -0.3}, 1e-3);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == Catch::Approx(1.0).epsilon(1e-14));
  for (double a : p) CHECK(a >= 1e-3);
  const auto q = detail::project_to_simplex({0.2, 0.3, 0.5}, 1e-3);
  CHECK(q[0] == Catch::Approx(0.2));
  CHECK(q[2] == Catch::Approx(0.5));
}

TEST_CASE("split maps round-trip", "[optimizer]") {
  const NetworkConfig cfg = make(3, 3);
  for (auto param : {SplitParameterization::kSoftmax, SplitParameterization::kProjected}) {
    const detail::SplitMap map(cfg, param, 1e-4);
    CHECK(map.dims() == 2 + 2 + 1);
    const SplitTable t = detail::start_table(cfg, 2, 9, 1e-4);
    const SplitTable back = map.to_table(map.from_table(t).data());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      for (std::size_t c = 0; c < t.rows[i].size(); ++c) CHECK(back.rows[i][c] == Catch::Approx(t.rows[i][c]).epsilon(1e-12));
    }
    NetworkConfig checked = cfg.with_splits(back);  // validates the table
    (void)checked;
  }
}

TEST_CASE("k = 1 has nothing to optimize", "[optimizer]") {
  const NetworkConfig cfg = make(3, 1);
  const SplitSolution s = optimize_splits(cfg, db_to_linear(10.0));
  CHECK(s.outage == s.equal_outage);
  CHECK(s.converged);
  for (const auto& row : s.splits.rows) CHECK(row == std::vector<double>{1.0});
}

TEST_CASE("optimized splits never lose to the equal split", "[optimizer]") {
  const NetworkConfig cfg = make(2, 2);
  for (double db : {0.0, 5.0, 15.0, 25.0}) {
    const SplitSolution s = optimize_splits(cfg, db_to_linear(db));
    CHECK(s.outage <= s.equal_outage + 1e-10);
    CHECK(std::abs(system_outage(cfg.with_splits(s.splits), db_to_linear(db)) - s.outage) < 1e-15);
  }
  const SplitSolution low = optimize_splits(cfg, db_to_linear(5.0));
  CHECK(low.outage < low.equal_outage);
  CHECK(low.converged);
}

TEST_CASE("optimizer forces q to zero", "[optimizer]") {
  const NetworkConfig cfg = make(2, 2, {1}, 0.4);
  const SplitSolution s = optimize_splits(cfg, db_to_linear(10.0));
  CHECK(s.equal_outage == system_outage(cfg.with_q(0.0), db_to_linear(10.0)));
}

TEST_CASE("softmax and projected coordinates agree", "[optimizer]") {
  const NetworkConfig cfg = make(2, 2);
  OptimizerOptions soft;
  OptimizerOptions proj;
  proj.param = SplitParameterization::kProjected;
  for (double db : {5.0, 20.0}) {
    const double a = optimize_splits(cfg, db_to_linear(db), soft).outage;
    const double b = optimize_splits(cfg, db_to_linear(db), proj).outage;
    CHECK(std::abs(a - b) < 1e-6);
  }
}

TEST_CASE("optimizer is deterministic", "[optimizer]") {
  const NetworkConfig cfg = make(2, 3);
  OptimizerOptions o;
  o.workers = 1;
  const SplitSolution a = optimize_splits(cfg, db_to_linear(8.0), o);
  o.workers = 4;
  const SplitSolution b = optimize_splits(cfg, db_to_linear(8.0), o);
  CHECK(a.outage == b.outage);
  CHECK(a.splits == b.splits);
  CHECK(a.best_start == b.best_start);
}
