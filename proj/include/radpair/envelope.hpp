#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace radpair {

/// Exponential fit to the oscillation envelope of a sampled signal.
struct EnvelopeFit {
  double rate = std::numeric_limits<double>::quiet_NaN(); // 1/time
  double log_amplitude = std::numeric_limits<double>::quiet_NaN();
  double r_squared = 0.0;
  std::vector<double> peak_times;
  std::vector<double> peak_values;
  bool ok = false;

  /// Envelope amplitude exp(log_amplitude - rate t).
  double amplitude_at(double t) const {
    return std::exp(log_amplitude - rate * t);
  }
};

namespace detail {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

inline LineFit least_squares_line(std::span<const double> x,
                                  std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0.0 && syy > 0.0) ? sxy * sxy / (sxx * syy) : 0.0;
  return fit;
}

} // namespace detail

/// Fits the decay rate of the oscillation envelope of `values` sampled at
/// `times`. The signal is detrended by a least-squares line, rectified, and
/// ln|residual| at the rectified peaks (interior local maxima, plus an end
/// point when it exceeds its neighbour) is fitted by least squares.
/// Needs at least three peaks; `ok` is false otherwise.
inline EnvelopeFit fit_envelope(std::span<const double> times,
                                std::span<const std::optional<double>> values) {
  std::vector<double> t, y;
  for (std::size_t i = 0; i < values.size() && i < times.size(); ++i) {
    if (values[i] && std::isfinite(*values[i])) {
      t.push_back(times[i]);
      y.push_back(*values[i]);
    }
  }
  EnvelopeFit out;
  if (t.size() < 4)
    return out;

  const detail::LineFit trend = detail::least_squares_line(t, y);
  std::vector<double> r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    r[i] = std::abs(y[i] - (trend.intercept + trend.slope * t[i]));

  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || r[i] >= r[i - 1];
    const bool right = i + 1 == n || r[i] >= r[i + 1];
    if (left && right && r[i] > 0.0) {
      out.peak_times.push_back(t[i]);
      out.peak_values.push_back(r[i]);
    }
  }
  if (out.peak_times.size() < 3)
    return out;

  std::vector<double> logs(out.peak_values.size());
  for (std::size_t i = 0; i < logs.size(); ++i)
    logs[i] = std::log(out.peak_values[i]);
  const detail::LineFit fit = detail::least_squares_line(out.peak_times, logs);
  out.rate = -fit.slope;
  out.log_amplitude = fit.intercept;
  out.r_squared = fit.r_squared;
  out.ok = std::isfinite(out.rate);
  return out;
}

} // namespace radpair
