#ifndef MYOPIC_UNITS_HPP
#define MYOPIC_UNITS_HPP

#include <cmath>

namespace myopic {

// All dB quantities in this library are power ratios: x_dB = 10 log10(x).
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// Transmit power for a plotted x-axis value. Axes are P/sigma^2 in dB.
inline double power_from_db(double p_db, double sigma2) {
  return sigma2 * db_to_linear(p_db);
}

}  // namespace myopic

#endif  // MYOPIC_UNITS_HPP
