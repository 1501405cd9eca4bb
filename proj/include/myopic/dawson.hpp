#ifndef MYOPIC_DAWSON_HPP
#define MYOPIC_DAWSON_HPP

#include <array>
#include <cmath>

namespace myopic {

namespace detail {

// Rybicki's sampling-theorem expansion with step h = 0.2. Truncation error is
// of order exp(-(pi / 2h)^2) ~ 1e-27, so the result is limited by rounding.
struct DawsonTable {
  static constexpr double kStep = 0.2;
  static constexpr int kTerms = 18;
  std::array<double, kTerms> coeff{};

  DawsonTable() {
    for (int i = 0; i < kTerms; ++i) {
      const double x = (2 * i + 1) * kStep;
      coeff[static_cast<std::size_t>(i)] = std::exp(-x * x);
    }
  }
};

inline const DawsonTable& dawson_table() {
  static const DawsonTable table;
  return table;
}

}  // namespace detail

/// Dawson's integral D(x) = exp(-x^2) * int_0^x exp(t^2) dt.
inline double dawson(double x) {
  const double ax = std::abs(x);
  double ans;
  if (ax < 0.2) {
    // Maclaurin series: sum (-1)^n 2^n x^(2n+1) / (2n+1)!!
    const double x2 = x * x;
    double term = x;
    ans = x;
    for (int n = 1; n < 12; ++n) {
      term *= -2.0 * x2 / (2 * n + 1);
      ans += term;
    }
    return ans;
  }
  if (ax > 60.0) {
    // Asymptotic: (1 / 2x) sum (2n-1)!! / (2x^2)^n
    const double inv = 1.0 / (2.0 * x * x);
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 8; ++n) {
      term *= (2 * n - 1) * inv;
      sum += term;
    }
    return sum / (2.0 * x);
  }
  const auto& tab = detail::dawson_table();
  constexpr double h = detail::DawsonTable::kStep;
  const int n0 = 2 * static_cast<int>(0.5 * ax / h + 0.5);
  const double xp = ax - n0 * h;
  double e1 = std::exp(2.0 * xp * h);
  const double e2 = e1 * e1;
  double d1 = n0 + 1;
  double d2 = d1 - 2.0;
  double sum = 0.0;
  for (int i = 0; i < detail::DawsonTable::kTerms; ++i, d1 += 2.0, d2 -= 2.0, e1 *= e2) {
    sum += tab.coeff[static_cast<std::size_t>(i)] * (e1 / d1 + 1.0 / (d2 * e1));
  }
  constexpr double inv_sqrt_pi = 0.56418958354775628695;
  ans = inv_sqrt_pi * std::exp(-xp * xp) * sum;
  return x < 0 ? -ans : ans;
}

}  // namespace myopic

#endif  // MYOPIC_DAWSON_HPP
