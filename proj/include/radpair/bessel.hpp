#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace radpair {

namespace detail {

inline constexpr int debye_terms = 12;
inline constexpr unsigned debye_min_order = 24;

/// Polynomials u_k(p) of the uniform asymptotic expansion of I_nu(nu z),
/// generated from
///   u_{k+1}(p) = p^2 (1 - p^2) u_k'(p) / 2 + (1/8) int_0^p (1 - 5t^2) u_k(t) dt.
inline const std::array<std::vector<long double>, debye_terms + 1> &
debye_polynomials() {
  static const auto table = [] {
    std::array<std::vector<long double>, debye_terms + 1> u;
    u[0] = {1.0L};
    for (int k = 0; k < debye_terms; ++k) {
      const auto &prev = u[k];
      std::vector<long double> next(prev.size() + 3, 0.0L);
      for (std::size_t i = 1; i < prev.size(); ++i) {
        const long double d = static_cast<long double>(i) * prev[i];
        next[i + 1] += 0.5L * d;  // p^2/2 * d p^(i-1)
        next[i + 3] -= 0.5L * d;  // -p^4/2 * d p^(i-1)
      }
      for (std::size_t i = 0; i < prev.size(); ++i) {
        next[i + 1] += prev[i] / (8.0L * static_cast<long double>(i + 1));
        next[i + 3] -= 5.0L * prev[i] / (8.0L * static_cast<long double>(i + 3));
      }
      u[k + 1] = std::move(next);
    }
    return u;
  }();
  return table;
}

inline long double horner(const std::vector<long double> &c, long double p) {
  long double acc = 0.0L;
  for (auto it = c.rbegin(); it != c.rend(); ++it)
    acc = acc * p + *it;
  return acc;
}

/// ln(e^{-x} I_nu(x)) from the uniform (Debye) expansion, nu >= 1, x > 0.
inline long double log_scaled_bessel_i_debye(unsigned order, long double x) {
  const long double nu = order;
  const long double s = std::sqrt(nu * nu + x * x);
  const long double p = nu / s;
  const auto &u = debye_polynomials();
  long double series = 0.0L;
  long double scale = 1.0L;
  for (int k = 0; k <= debye_terms; ++k) {
    series += horner(u[k], p) * scale;
    scale /= nu;
  }
  // nu*eta - x = sqrt(nu^2+x^2) - x - nu asinh(nu/x), arranged to avoid
  // cancellation when x >> nu.
  const long double exponent = nu * nu / (s + x) - nu * std::asinh(nu / x);
  return -0.5L * std::log(2.0L * std::numbers::pi_v<long double> * nu) +
         0.5L * std::log(p) + exponent + std::log(series);
}

} // namespace detail

/// ln(e^{-x} I_nu(x)) for integer order nu >= 0 and x >= 0.
///
/// Orders at or above `debye_min_order` use the uniform asymptotic expansion
/// directly. Lower orders start from the expansion at that order and run the
/// ratio recurrence I_{j-1}/I_j = 2j/x + I_{j+1}/I_j downward, which is
/// stable for I. Everything stays in log space so arguments of order 1e7 and
/// orders of order 1e5 neither overflow nor underflow.
inline long double log_scaled_bessel_i(unsigned order, long double x) {
  if (x < 0.0L || std::isnan(x))
    return std::numeric_limits<long double>::quiet_NaN();
  if (x == 0.0L)
    return order == 0 ? 0.0L : -std::numeric_limits<long double>::infinity();
  if (order >= detail::debye_min_order)
    return detail::log_scaled_bessel_i_debye(order, x);

  const unsigned top = detail::debye_min_order;
  const long double log_top = detail::log_scaled_bessel_i_debye(top, x);
  // ratio = I_{j+1}/I_j, starting at j = top.
  long double ratio =
      std::exp(detail::log_scaled_bessel_i_debye(top + 1, x) - log_top);
  long double log_value = log_top;
  for (unsigned j = top; j > order; --j) {
    ratio = 1.0L / (2.0L * static_cast<long double>(j) / x + ratio);
    // ratio is now I_j / I_{j-1}
    log_value -= std::log(ratio);
  }
  return log_value;
}

/// ln I_nu(x).
inline long double log_bessel_i(unsigned order, long double x) {
  return log_scaled_bessel_i(order, x) + x;
}

} // namespace radpair
