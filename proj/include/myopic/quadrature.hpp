#ifndef MYOPIC_QUADRATURE_HPP
#define MYOPIC_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace myopic {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
  bool converged = true;
};

namespace detail {

// Nodes and weights come from Boost's 21-point Kronrod / 10-point Gauss tables.
template <class F>
QuadResult gk21_panel(const F& f, double a, double b) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
  using Gauss = boost::math::quadrature::gauss<double, 10>;
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double f0 = f(mid);
  double kronrod = f0 * wk[0];
  double gauss = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fp = f(mid + half * x[i]);
    const double fm = f(mid - half * x[i]);
    kronrod += (fp + fm) * wk[i];
    if (i % 2 == 1) gauss += (fp + fm) * wg[i / 2];
  }
  QuadResult r;
  r.value = kronrod * half;
  r.error = std::max(std::abs(kronrod - gauss) * std::abs(half),
                     2e-16 * std::abs(r.value));
  r.panels = 1;
  return r;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod over the panels delimited by breaks
/// (sorted, at least two entries): bisects the panel with the largest error
/// estimate until the summed estimate drops below abs_tol.
template <class F>
QuadResult integrate_adaptive(const F& f, const std::vector<double>& breaks, double abs_tol,
                              int max_panels = 4000) {
  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  std::priority_queue<Panel> heap;
  auto push = [&](double lo, double hi) {
    const QuadResult r = detail::gk21_panel(f, lo, hi);
    heap.push({lo, hi, r.value, r.error});
    return r;
  };
  double total_err = 0.0;
  int panels = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total_err += push(breaks[i], breaks[i + 1]).error;
    ++panels;
  }
  while (total_err > abs_tol && panels < max_panels) {
    const Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    const QuadResult left = push(worst.a, mid);
    const QuadResult right = push(mid, worst.b);
    total_err += left.error + right.error - worst.error;
    ++panels;
  }
  QuadResult out;
  out.panels = panels;
  // Re-sum from scratch to avoid drift in the running error total.
  while (!heap.empty()) {
    out.value += heap.top().value;
    out.error += heap.top().error;
    heap.pop();
  }
  out.converged = out.error <= abs_tol;
  return out;
}

template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b, double abs_tol,
                              int max_panels = 4000) {
  return integrate_adaptive(f, std::vector<double>{a, b}, abs_tol, max_panels);
}

}  // namespace myopic

#endif  // MYOPIC_QUADRATURE_HPP
