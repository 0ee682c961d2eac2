#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "radpair/bessel.hpp"
#include "radpair/error.hpp"
#include "radpair/rng.hpp"
#include "radpair/trajectory.hpp"

namespace radpair {

/// Photon counts per bin for one (simulated or measured) experiment.
struct CountSeries {
  std::vector<double> edges;        // n + 1 edges
  std::vector<double> expected;     // N_k, may be empty for ingested data
  std::vector<std::uint64_t> sampled;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;

  std::size_t size() const { return sampled.size(); }
};

struct SkellamParams {
  double n1 = 0.0;
  double n2 = 0.0;
};

struct SigmaDeltaN {
  double exact = 0.0;      // sqrt(N_t + N_next) / N_t
  double simplified = 0.0; // sqrt(2 / N_t)
};

inline constexpr double poisson_inversion_limit = 30.0;
inline constexpr double poisson_gaussian_limit = 1e7;

namespace detail {

inline void validate_mean(double mean) {
  if (!std::isfinite(mean) || mean < 0.0)
    throw ValidationError("Poisson mean must be finite and non-negative, got " +
                          std::to_string(mean));
}

template <typename Rng> std::uint64_t poisson_inversion(double mean, Rng &rng) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  // The tail beyond mean + 40 sqrt(mean) + 40 is far below 2^-53.
  const double cap = mean + 40.0 * std::sqrt(mean) + 40.0;
  while (u > cdf && static_cast<double>(k) < cap) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

/// Hormann's PTRS transformed rejection, valid for mean >= 10.
template <typename Rng> std::uint64_t poisson_ptrs(double mean, Rng &rng) {
  const double log_mean = std::log(mean);
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r)
      return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us))
      continue;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = -mean + k * log_mean - std::lgamma(k + 1.0);
    if (lhs <= rhs)
      return static_cast<std::uint64_t>(k);
  }
}

} // namespace detail

/// Poisson draw. Exact inversion below 30, transformed rejection up to 1e7,
/// rounded Gaussian with continuity correction above.
template <typename Rng> std::uint64_t poisson_sample(double mean, Rng &rng) {
  detail::validate_mean(mean);
  if (mean == 0.0)
    return 0;
  if (mean < poisson_inversion_limit)
    return detail::poisson_inversion(mean, rng);
  if (mean < poisson_gaussian_limit)
    return detail::poisson_ptrs(mean, rng);
  const double x = std::floor(mean + std::sqrt(mean) * rng.normal() + 0.5);
  return x <= 0.0 ? 0 : static_cast<std::uint64_t>(x);
}

inline long double poisson_log_pmf(long long k, double mean) {
  if (k < 0)
    return -std::numeric_limits<long double>::infinity();
  if (mean == 0.0)
    return k == 0 ? 0.0L : -std::numeric_limits<long double>::infinity();
  const long double kk = static_cast<long double>(k);
  return kk * std::log(static_cast<long double>(mean)) - mean -
         std::lgamma(kk + 1.0L);
}

inline void validate(const SkellamParams &params) {
  if (!std::isfinite(params.n1) || !std::isfinite(params.n2) ||
      params.n1 < 0.0 || params.n2 < 0.0)
    throw ValidationError("Skellam means must be finite and non-negative");
}

/// ln f(k; N1, N2) for the difference of Poisson(N1) and Poisson(N2):
///   -(sqrt N1 - sqrt N2)^2 + (k/2) ln(N1/N2) + ln(e^{-x} I_|k|(x)),
///   x = 2 sqrt(N1 N2).
inline long double skellam_log_pmf(long long k, const SkellamParams &params) {
  validate(params);
  if (params.n2 == 0.0)
    return poisson_log_pmf(k, params.n1);
  if (params.n1 == 0.0)
    return poisson_log_pmf(-k, params.n2);
  const long double n1 = params.n1;
  const long double n2 = params.n2;
  const long double r1 = std::sqrt(n1);
  const long double r2 = std::sqrt(n2);
  const long double x = 2.0L * r1 * r2;
  const auto order = static_cast<unsigned>(k < 0 ? -k : k);
  return -(r1 - r2) * (r1 - r2) +
         0.5L * static_cast<long double>(k) * (std::log(n1) - std::log(n2)) +
         log_scaled_bessel_i(order, x);
}

inline double skellam_pmf(long long k, const SkellamParams &params) {
  return static_cast<double>(std::exp(skellam_log_pmf(k, params)));
}

inline SigmaDeltaN sigma_delta_n(double n_t, double n_next) {
  if (!(n_t > 0.0) || !std::isfinite(n_t))
    throw ValidationError("N_t must be positive, got " + std::to_string(n_t));
  if (!(n_next >= 0.0) || !std::isfinite(n_next))
    throw ValidationError("N_{t+dt} must be non-negative");
  return {std::sqrt(n_t + n_next) / n_t, std::sqrt(2.0 / n_t)};
}

/// delta n_k = (n_{k+1} - n_k) / N_k. Bins with N_k = 0 give empty entries.
inline DeltaN delta_n_sampled(const CountSeries &counts) {
  if (counts.expected.size() != counts.sampled.size())
    throw ValidationError("expected and sampled counts differ in length");
  return normalized_differences(counts.sampled, counts.expected);
}

inline CountSeries sample_counts(const BinnedExpectation &bins,
                                 std::uint64_t seed, std::uint64_t trial) {
  RandomStream rng(seed, trial);
  CountSeries out;
  out.edges = bins.edges;
  out.expected = bins.expected;
  out.seed = seed;
  out.trial = trial;
  out.sampled.reserve(bins.size());
  for (double mean : bins.expected)
    out.sampled.push_back(poisson_sample(mean, rng));
  return out;
}

/// `trials` independent Poisson realizations of the binned expectation.
/// Trial i always uses stream (seed, i), so output is independent of the
/// number of worker threads.
inline std::vector<CountSeries>
monte_carlo_counts(const BinnedExpectation &bins, std::size_t trials,
                   std::uint64_t seed, unsigned workers = 0) {
  if (trials == 0)
    throw ValidationError("number of trials must be at least 1");
  for (double mean : bins.expected)
    detail::validate_mean(mean);
  std::vector<CountSeries> out(trials);
  if (workers == 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = sample_counts(bins, seed, i);
  };
  if (workers <= 1) {
    run(0, trials);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (trials + workers - 1) / workers;
    for (std::size_t begin = 0; begin < trials; begin += chunk)
      pool.emplace_back(run, begin, std::min(trials, begin + chunk));
  }
  return out;
}

} // namespace radpair
