#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "myopic/dawson.hpp"
#include "myopic/link_outage.hpp"
#include "myopic/quadrature.hpp"

using namespace myopic;
using boost::math::quadrature::gauss_kronrod;

namespace {

// Independent oracle: Boost's recursive G-K on a finite interval.
template <class F>
double gk(F f, double a, double b, double tol = 1e-12, unsigned depth = 10) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, depth, tol);
}

// Density of sqrt(w)|h| with |h|^2 unit-mean exponential.
double amplitude_pdf(double x, double w) { return 2.0 * x / w * std::exp(-x * x / w); }
double amplitude_cdf(double x, double w) { return x <= 0.0 ? 0.0 : -std::expm1(-x * x / w); }

LinkPattern pattern(std::vector<double> w, double tau) {
  LinkPattern p;
  p.weights = std::move(w);
  p.tau = tau;
  return p;
}

}  // namespace

TEST_CASE("Dawson function against its defining integral", "[link]") {
  for (double x : {0.0, 1e-3, 0.1, 0.19, 0.21, 0.5, 0.9241388730, 1.5, 3.0, 7.5, 20.0, 59.0, 61.0, 200.0}) {
    double oracle = 0.0;
    if (x > 0.0) {
      // D(x) = int_0^x exp(t^2 - x^2) dt
      oracle = gk([x](double t) { return std::exp((t - x) * (t + x)); }, 0.0, x, 1e-15, 20);
    }
    CHECK(dawson(x) == Catch::Approx(oracle).epsilon(1e-13).margin(1e-300));
    CHECK(dawson(-x) == -dawson(x));
  }
}

TEST_CASE("characteristic function", "[link]") {
  CHECK(characteristic_function(0.0, 0.7) == std::complex<double>(1.0, 0.0));

  for (double w : {1.0, 0.125, 4.0}) {
    for (double t : {0.3, 1.0, 2.5}) {
      const double hi = 12.0 * std::sqrt(w);
      const double re = gk([&](double x) { return std::cos(t * x) * amplitude_pdf(x, w); }, 0.0, hi);
      const double im = gk([&](double x) { return std::sin(t * x) * amplitude_pdf(x, w); }, 0.0, hi);
      const auto phi = characteristic_function(t, w);
      CHECK(std::abs(phi.real() - re) < 1e-10);
      CHECK(std::abs(phi.imag() - im) < 1e-10);
    }
    // The density has f(0) = 0 and f'(0) = 2/w, so phi(t) ~ -2 / (w t^2):
    // the decay is algebraic, and |phi| < 1e-6 needs t sqrt(w) of order 1e3.
    for (double s : {50.0, 100.0, 1e3, 1e5}) {
      const double t = s / std::sqrt(w);
      const double tail = -2.0 / (w * t * t);
      CHECK(std::abs(characteristic_function(t, w) - tail) < 0.05 * std::abs(tail));
    }
    for (double s : {2e3, 1e4, 1e6}) CHECK(std::abs(characteristic_function(s / std::sqrt(w), w)) < 1e-6);
  }
}

TEST_CASE("single-link outage", "[link]") {
  CHECK(outage_single_link(1.0, 0.0) == 0.0);
  CHECK(outage_single_link(1.0, std::log(2.0)) == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(outage_single_link(1.0, 0.1) == Catch::Approx(0.0951625819640404).epsilon(1e-14));

  // Monte Carlo of |h|^2 ~ Exp(1): P[|h|^2 < 0.1].
  std::mt19937_64 gen(7);
  std::exponential_distribution<double> exp1(1.0);
  const int n = 10'000'000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += exp1(gen) < 0.1;
  const double p = 0.0951625819640404;
  CHECK(std::abs(hits / static_cast<double>(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("Gil-Pelaez single feeder matches the exponential cdf", "[link]") {
  for (double w : {0.125, 1.0, 3.0}) {
    for (double tau : {1e-4, 0.01, 0.3, 2.0, 10.0}) {
      const double exact = outage_single_link(w, tau);
      CHECK(std::abs(outage_gil_pelaez(pattern({w}, tau)) - exact) < 1e-12);
      GilPelaezOptions direct;
      direct.form = GilPelaezForm::kDirect;
      CHECK(std::abs(outage_gil_pelaez(pattern({w}, tau), direct) - exact) < 1e-10);
    }
  }
  CHECK(outage_gil_pelaez(pattern({1.0}, 0.0)) == 0.0);
}

TEST_CASE("Gil-Pelaez two feeders against a convolution integral", "[link]") {
  for (auto [w1, w2] : {std::pair{1.0, 1.0}, std::pair{0.125, 1.0}, std::pair{0.5, 0.02}}) {
    for (double tau : {1e-3, 0.05, 1.0, 4.0}) {
      const double r = std::sqrt(tau);
      // P[X1 + X2 < r] = int_0^r f1(x) F2(r - x) dx
      const double oracle =
          gk([&](double x) { return amplitude_pdf(x, w1) * amplitude_cdf(r - x, w2); }, 0.0, r);
      CHECK(std::abs(outage_gil_pelaez(pattern({w1, w2}, tau)) - oracle) < 1e-11);
      GilPelaezOptions direct;
      direct.form = GilPelaezForm::kDirect;
      CHECK(std::abs(outage_gil_pelaez(pattern({w1, w2}, tau), direct) - oracle) < 1e-10);
    }
  }
}

TEST_CASE("Gil-Pelaez three feeders against a double integral", "[link]") {
  const double w1 = 0.5, w2 = 0.25, w3 = 1.0, tau = 0.8;
  const double r = std::sqrt(tau);
  const double oracle = gk(
      [&](double x) {
        return amplitude_pdf(x, w1) *
               gk([&](double y) { return amplitude_pdf(y, w2) * amplitude_cdf(r - x - y, w3); }, 0.0, r - x);
      },
      0.0, r);
  CHECK(std::abs(outage_gil_pelaez(pattern({w1, w2, w3}, tau)) - oracle) < 1e-10);
}

TEST_CASE("Gil-Pelaez two unit feeders against Monte Carlo", "[link]") {
  std::mt19937_64 gen(11);
  std::exponential_distribution<double> exp1(1.0);
  const int n = 10'000'000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += std::sqrt(exp1(gen)) + std::sqrt(exp1(gen)) < 1.0;
  const double p = outage_gil_pelaez(pattern({1.0, 1.0}, 1.0));
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(hits / static_cast<double>(n) - p) < 3.0 * se);
}

TEST_CASE("Gil-Pelaez outage is monotone", "[link]") {
  double prev = 0.0;
  for (double tau = 1e-3; tau < 20.0; tau *= 1.7) {
    const double p = outage_gil_pelaez(pattern({0.3, 0.8}, tau));
    CHECK(p >= prev);
    CHECK(p <= 1.0);
    prev = p;
  }
  // Another active feeder never hurts.
  for (double tau : {0.01, 0.5, 3.0}) {
    CHECK(outage_gil_pelaez(pattern({0.3, 0.8, 0.05}, tau)) <= outage_gil_pelaez(pattern({0.3, 0.8}, tau)));
    CHECK(outage_gil_pelaez(pattern({0.3, 0.8}, tau)) <= outage_single_link(0.8, tau));
  }
}

TEST_CASE("SAA outage", "[link]") {
  for (double w : {0.125, 1.0, 2.0}) {
    for (double tau : {0.0, 1e-3, 0.2, 5.0}) {
      CHECK(std::abs(outage_saa(pattern({w}, tau)) - outage_single_link(w, tau)) < 1e-15);
    }
  }
  // Tight approximation of the exact value at 20 dB.
  const double tau = 0.01;
  const double exact = outage_gil_pelaez(pattern({0.5, 0.5}, tau));
  CHECK(std::abs(outage_saa(pattern({0.5, 0.5}, tau)) - exact) / exact < 0.10);
}

TEST_CASE("pattern outage dispatch", "[link]") {
  CHECK(pattern_outage(pattern({}, 0.1), OutageMethod::kExact) == 1.0);
  CHECK(pattern_outage(pattern({1.0}, 0.1), OutageMethod::kExact) == outage_single_link(1.0, 0.1));
  CHECK(pattern_outage(pattern({1.0, 0.5}, 0.1), OutageMethod::kSaa) == outage_saa(pattern({1.0, 0.5}, 0.1)));
}

TEST_CASE("outage calculator memoization", "[link]") {
  NetworkSpec s;
  s.n_relays = 2;
  s.k_hops = 2;
  const OutageCalculator calc{NetworkConfig(s)};
  for (unsigned mask = 0; mask < 4; ++mask) {
    const double first = calc.node_outage(3, mask, 31.6);
    CHECK(calc.node_outage(3, mask, 31.6) == first);
    CHECK(calc.compute(3, mask, 31.6) == first);
  }
  CHECK(calc.cache_size() == 4);
  CHECK(calc.node_outage(3, 0, 31.6) == 1.0);
}

TEST_CASE("conventional benchmark", "[link]") {
  NetworkSpec s;
  s.n_relays = 2;
  s.k_hops = 1;
  s.gamma = 1.0;
  const NetworkConfig cfg(s);
  CHECK(conventional_benchmark(cfg, 100.0) == Catch::Approx(-std::expm1(-0.21)).epsilon(1e-14));
  CHECK(conventional_benchmark(cfg, 1e15) < 1e-12);

  // Orthogonal chain with the boosted threshold gamma_c = 7, simulated.
  std::mt19937_64 gen(5);
  std::exponential_distribution<double> exp1(1.0);
  const int n = 2'000'000;
  int fails = 0;
  for (int i = 0; i < n; ++i) {
    bool ok = true;
    for (int h = 0; h < 3; ++h) ok = (100.0 * exp1(gen) >= 7.0) && ok;
    fails += !ok;
  }
  const double p = conventional_benchmark(cfg, 100.0);
  CHECK(std::abs(fails / static_cast<double>(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));

  s.positions = {0.0, 1.0, 1.5, 3.0};
  CHECK_THROWS_AS(conventional_benchmark(NetworkConfig(s), 100.0), ConfigError);
}

TEST_CASE("own adaptive quadrature", "[link]") {
  const auto r = integrate_adaptive([](double x) { return std::exp(-x) * std::cos(5 * x); }, 0.0, 30.0, 1e-13);
  const double exact = (1.0 - std::exp(-30.0) * (std::cos(150.0) - 5 * std::sin(150.0))) / 26.0;
  CHECK(r.converged);
  CHECK(std::abs(r.value - exact) < 1e-13);
}
