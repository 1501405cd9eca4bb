#ifndef MYOPIC_LINK_OUTAGE_HPP
#define MYOPIC_LINK_OUTAGE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "myopic/config.hpp"
#include "myopic/dawson.hpp"
#include "myopic/error.hpp"
#include "myopic/quadrature.hpp"
#include "myopic/state.hpp"

// Fading convention: |h|^2 is unit-mean exponential, so the amplitude of a
// link with weight w = a / d^eta is Rayleigh with scale c = sqrt(w / 2).
// Every outage routine and the protocol simulator use this convention.

namespace myopic {

/// Receiver j together with the weights of its currently active feeders.
struct LinkPattern {
  int receiver = 0;
  std::vector<double> weights;  // w_i = a_{i,j} / d_{i,j}^eta, all > 0
  double tau = 0.0;             // gamma sigma^2 / P

  int count() const { return static_cast<int>(weights.size()); }
};

/// 1 - exp(-tau / w).
inline double outage_single_link(double weight, double tau) {
  return -std::expm1(-tau / weight);
}

/// Characteristic function of sqrt(w)|h| evaluated with Dawson's integral:
///   phi(t) = 1 - sqrt(2) c t D(c t / sqrt 2) + j c t sqrt(pi/2) exp(-c^2 t^2 / 2)
/// with c = sqrt(w/2). Nothing in this form overflows for large t.
inline std::complex<double> characteristic_function(double t, double weight) {
  const double c = std::sqrt(0.5 * weight);
  const double ct = c * t;
  const double re = 1.0 - std::numbers::sqrt2 * ct * dawson(ct / std::numbers::sqrt2);
  const double im = ct * std::sqrt(0.5 * std::numbers::pi) * std::exp(-0.5 * ct * ct);
  return {re, im};
}

enum class GilPelaezForm {
  // 1 - (2/pi) int cos(xt) Im[Phi(t)] / t dt. Uses that the amplitude sum is
  // nonnegative; the integrand decays like a Gaussian.
  kFolded,
  // 1/2 - (1/pi) int Im[exp(-jxt) Phi(t)] / t dt, evaluated literally. The
  // real part of Phi decays only like t^-2C, so the tail is summed over
  // half-periods with Wynn's epsilon acceleration.
  kDirect,
};

struct GilPelaezOptions {
  GilPelaezForm form = GilPelaezForm::kFolded;
  double abs_tol = 1e-13;
  int max_panels = 4000;
  int max_tail_panels = 20000;
};

namespace detail {

inline std::complex<double> cf_product(double t, const std::vector<double>& weights) {
  std::complex<double> prod{1.0, 0.0};
  for (double w : weights) prod *= characteristic_function(t, w);
  return prod;
}

inline std::vector<double> even_breaks(double a, double b, int panels) {
  std::vector<double> breaks(static_cast<std::size_t>(panels) + 1);
  for (int p = 0; p <= panels; ++p) breaks[static_cast<std::size_t>(p)] = a + (b - a) * p / panels;
  breaks.back() = b;
  return breaks;
}

// Wynn epsilon table over a growing sequence of partial sums.
class WynnEpsilon {
public:
  double push(double s) {
    std::vector<double> next(1, s);
    // next[r] = eps_{r-1}^{(n-r)}; row layout follows the classic rhombus rule.
    for (std::size_t r = 1; r <= last_.size(); ++r) {
      const double diff = next[r - 1] - last_[r - 1];
      const double prev = r >= 2 ? last_[r - 2] : 0.0;
      if (diff == 0.0) break;
      next.push_back(prev + 1.0 / diff);
      if (next.size() >= kMaxColumns) break;
    }
    last_ = std::move(next);
    // Even columns carry the extrapolated limits.
    const std::size_t col = (last_.size() - 1) & ~std::size_t{1};
    return last_[col];
  }

private:
  static constexpr std::size_t kMaxColumns = 40;
  std::vector<double> last_;
};

inline double clamp_probability(double p, double tol, const char* what) {
  if (p < 0.0) {
    if (p >= -1e-9) return 0.0;
    throw IntegrationError(std::string(what) + " produced a negative probability " +
                           std::to_string(p) + " (tolerance " + std::to_string(tol) + ")");
  }
  if (p > 1.0) {
    if (p <= 1.0 + 1e-9) return 1.0;
    throw IntegrationError(std::string(what) + " produced a probability above one");
  }
  return p;
}

inline double gil_pelaez_folded(const LinkPattern& pat, double cmin, const GilPelaezOptions& opt) {
  const double x = std::sqrt(pat.tau);
  // |Im Phi(t)| <= sum_i c_i t sqrt(pi/2) exp(-c_i^2 t^2 / 2); beyond c_min t = 10
  // the remaining mass is below 1e-20.
  const double upper = 10.0 / cmin;
  const auto f = [&](double t) {
    if (t == 0.0) return 0.0;
    return std::cos(x * t) * cf_product(t, pat.weights).imag() / t;
  };
  const int panels = std::max(4, static_cast<int>(std::ceil(x * upper / std::numbers::pi)));
  const QuadResult r = integrate_adaptive(f, even_breaks(0.0, upper, panels),
                                          0.5 * opt.abs_tol, opt.max_panels);
  if (!r.converged) {
    throw IntegrationError("Gil-Pelaez quadrature error estimate " + std::to_string(r.error) +
                           " exceeds tolerance " + std::to_string(opt.abs_tol));
  }
  const double sum = r.value;
  return 1.0 - 2.0 / std::numbers::pi * sum;
}

inline double gil_pelaez_direct(const LinkPattern& pat, double cmin, const GilPelaezOptions& opt) {
  const double x = std::sqrt(pat.tau);
  const auto g = [&](double t) {
    if (t == 0.0) return 0.0;
    const std::complex<double> rot{std::cos(x * t), -std::sin(x * t)};
    return (rot * cf_product(t, pat.weights)).imag() / t;
  };
  const double half = std::numbers::pi / x;
  const double t0 = 10.0 / cmin;

  // Head: oscillation-resolved panels up to t0, then a geometric bridge to
  // the first zero of sin(xt) beyond t0, which can lie decades away.
  const int panels = std::max(4, static_cast<int>(std::ceil(t0 / half)));
  std::vector<double> breaks = even_breaks(0.0, t0, panels);
  const double k0 = std::ceil(t0 / half);
  const double first_zero = k0 * half;
  while (breaks.back() < first_zero) breaks.push_back(std::min(first_zero, 2.0 * breaks.back()));
  const QuadResult head = integrate_adaptive(g, breaks, 0.5 * opt.abs_tol, opt.max_panels);
  double err = head.error;

  // Tail: alternating half-period contributions.
  WynnEpsilon wynn;
  double partial = head.value;
  double prev_estimate = wynn.push(partial);
  double estimate = prev_estimate;
  int stable = 0;
  bool converged = false;
  for (int n = 0; n < opt.max_tail_panels; ++n) {
    const double lo = (k0 + n) * half;
    const QuadResult term = integrate_adaptive(g, lo, lo + half, 1e-3 * opt.abs_tol, 64);
    err += term.error;
    partial += term.value;
    estimate = wynn.push(partial);
    if (std::abs(term.value) < 1e-3 * opt.abs_tol) {
      estimate = partial;
      converged = true;
      break;
    }
    stable = std::abs(estimate - prev_estimate) < 0.1 * opt.abs_tol ? stable + 1 : 0;
    prev_estimate = estimate;
    if (n >= 6 && stable >= 3) {
      converged = true;
      break;
    }
  }
  if (!head.converged || !converged || err > opt.abs_tol) {
    throw IntegrationError("Gil-Pelaez tail did not converge (error estimate " +
                           std::to_string(err) + ")");
  }
  return 0.5 - estimate / std::numbers::pi;
}

}  // namespace detail

/// P[sum_i sqrt(w_i)|h_i| < sqrt(tau)] by Gil-Pelaez inversion of the
/// characteristic function of the coherent amplitude sum.
inline double outage_gil_pelaez(const LinkPattern& pat, const GilPelaezOptions& opt = {}) {
  if (pat.count() < 1) throw Error("Gil-Pelaez outage needs at least one transmitter");
  if (pat.tau <= 0.0) return 0.0;
  double cmin = std::numeric_limits<double>::infinity();
  for (double w : pat.weights) {
    if (!(w > 0.0)) throw Error("link weights must be positive");
    cmin = std::min(cmin, std::sqrt(0.5 * w));
  }
  const double p = opt.form == GilPelaezForm::kFolded ? detail::gil_pelaez_folded(pat, cmin, opt)
                                                      : detail::gil_pelaez_direct(pat, cmin, opt);
  return detail::clamp_probability(p, opt.abs_tol, "Gil-Pelaez inversion");
}

/// Double factorial (2n - 1)!!.
inline double odd_double_factorial(int n) {
  double v = 1.0;
  for (int i = 2 * n - 1; i > 1; i -= 2) v *= i;
  return v;
}

/// Small-argument approximation. With u = tau / (2 theta) the outage is the
/// regularized lower incomplete gamma P(C, u).
inline double outage_saa(const LinkPattern& pat) {
  const int count = pat.count();
  if (count < 1) throw Error("SAA outage needs at least one transmitter");
  if (pat.tau <= 0.0) return 0.0;
  double scale_sum = 0.0;
  for (double w : pat.weights) scale_sum += 0.5 * w;
  const double theta = std::pow(odd_double_factorial(count), 1.0 / count) * scale_sum / count;
  const double u = pat.tau / (2.0 * theta);
  return boost::math::gamma_p(static_cast<double>(count), u);
}

enum class OutageMethod {
  kExact,      // closed form for one feeder, Gil-Pelaez otherwise
  kSaa,        // SAA for every pattern (reduces to the closed form for C = 1)
  kGilPelaez,  // Gil-Pelaez for every pattern, including C = 1
};

inline std::string to_string(OutageMethod m) {
  switch (m) {
    case OutageMethod::kExact: return "exact";
    case OutageMethod::kSaa: return "saa";
    case OutageMethod::kGilPelaez: return "gil-pelaez";
  }
  return "?";
}

inline double pattern_outage(const LinkPattern& pat, OutageMethod method,
                             const GilPelaezOptions& opt = {}) {
  if (pat.count() == 0) return 1.0;
  switch (method) {
    case OutageMethod::kExact:
      return pat.count() == 1 ? outage_single_link(pat.weights.front(), pat.tau)
                              : outage_gil_pelaez(pat, opt);
    case OutageMethod::kSaa: return outage_saa(pat);
    case OutageMethod::kGilPelaez: return outage_gil_pelaez(pat, opt);
  }
  return 1.0;
}

/// Per-node outage P_o(j, m) for one branch, memoized by
/// (receiver, incoming-link bitmask, P). Safe for concurrent use.
class OutageCalculator {
public:
  explicit OutageCalculator(NetworkConfig cfg, OutageMethod method = OutageMethod::kExact,
                            GilPelaezOptions opt = {})
      : cfg_(std::move(cfg)), method_(method), opt_(opt) {}

  const NetworkConfig& config() const { return cfg_; }
  OutageMethod method() const { return method_; }

  LinkPattern pattern(int receiver, unsigned mask, double power) const {
    LinkPattern pat;
    pat.receiver = receiver;
    pat.tau = cfg_.tau(power);
    for (int d = 1; d <= cfg_.k_hops(); ++d) {
      if (mask & (1u << (d - 1))) pat.weights.push_back(cfg_.link_weight(receiver - d, receiver));
    }
    return pat;
  }

  double node_outage(int receiver, unsigned mask, double power) const {
    const Key key{receiver, mask, power};
    {
      std::shared_lock lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const double value = compute(receiver, mask, power);
    std::unique_lock lock(mutex_);
    cache_.emplace(key, value);
    return value;
  }

  /// Same value as node_outage but bypassing the cache.
  double compute(int receiver, unsigned mask, double power) const {
    return pattern_outage(pattern(receiver, mask, power), method_, opt_);
  }

  double outage_per_node(int receiver, const StateLayout& layout, std::uint64_t code,
                         double power) const {
    return node_outage(receiver, layout.incoming_mask(receiver, code), power);
  }

  double outage_per_node(int receiver, const StateLayout& layout, const NetworkState& s,
                         double power) const {
    return outage_per_node(receiver, layout, s.index - 1, power);
  }

  std::size_t cache_size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

private:
  using Key = std::tuple<int, unsigned, double>;
  NetworkConfig cfg_;
  OutageMethod method_;
  GilPelaezOptions opt_;
  mutable std::shared_mutex mutex_;
  mutable std::map<Key, double> cache_;
};

/// Conventional orthogonal multi-hop DF: every hop must clear the boosted
/// threshold gamma_c = (gamma + 1)^(N+1) - 1.
inline double conventional_benchmark(const NetworkConfig& cfg, double power) {
  if (!cfg.equispaced()) throw ConfigError("the conventional benchmark assumes equispaced nodes");
  const int hops = cfg.n_relays() + 1;
  const double gamma_c = std::pow(cfg.gamma() + 1.0, hops) - 1.0;
  const double d = cfg.end_distance() / hops;
  return -std::expm1(-hops * gamma_c * std::pow(d, cfg.eta()) * cfg.sigma2() / power);
}

}  // namespace myopic

#endif  // MYOPIC_LINK_OUTAGE_HPP
