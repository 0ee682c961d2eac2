#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "radpair/error.hpp"
#include "radpair/master_equations.hpp"
#include "radpair/spin_hilbert.hpp"

namespace radpair {

struct TimeGrid {
  double t0 = 0.0;
  double t_end = 0.0;
  double step = 0.0;

  std::size_t steps() const {
    return static_cast<std::size_t>(std::ceil((t_end - t0) / step - 1e-9));
  }
};

inline void validate(const TimeGrid &grid) {
  if (!std::isfinite(grid.t0) || !std::isfinite(grid.t_end) ||
      !std::isfinite(grid.step))
    throw ValidationError("time grid must be finite");
  if (!(grid.step > 0.0))
    throw ValidationError("time step must be positive");
  if (grid.step > (grid.t_end - grid.t0) * (1.0 + 1e-12))
    throw ValidationError("time step exceeds integration interval");
}

enum class HaltReason { none, trace_floor, positivity };

struct IntegrateOptions {
  /// Relative local error estimate (step vs. two half steps) that rejects h.
  double richardson_tolerance = 1e-6;
  /// Most negative eigenvalue tolerated, relative to the initial trace.
  double positivity_tolerance = 1e-6;
  /// Floor on Tr rho relative to the initial trace.
  double trace_floor = 1e-12;
  /// Run the error / eigenvalue monitors every this many steps (0 disables).
  std::size_t monitor_stride = 1;
};

struct Trajectory {
  std::vector<double> times;
  /// Tr{Q_S rho_t} / Tr rho_0
  std::vector<double> qs_expect;
  std::vector<double> trace;
  std::vector<double> p_coh;
  /// ||rho_tilde||_tr
  std::vector<double> tilde_norm;
  ModelSpec model;
  double step = 0.0;
  HaltReason halt = HaltReason::none;
  double min_eigenvalue = 0.0;
  double max_error_estimate = 0.0;

  std::size_t size() const { return times.size(); }
};

struct BinnedExpectation {
  /// n + 1 edges for n bins.
  std::vector<double> edges;
  std::vector<double> expected;
  double k_s = 1.0;

  std::size_t size() const { return expected.size(); }
  double width() const { return edges.size() > 1 ? edges[1] - edges[0] : 0.0; }
};

/// Normalized successive-bin differences under both sign conventions.
/// Entry k is undefined when the normalizing count N_k is not positive.
struct DeltaN {
  std::vector<std::optional<double>> text; // (N_{k+1} - N_k) / N_k
  std::vector<std::optional<double>> fig;  // (N_k - N_{k+1}) / N_k
};

namespace detail {

inline double min_eigenvalue(const Matrix &rho) {
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

template <typename Rhs>
Matrix rk4_step(const Rhs &rhs, const Matrix &y, double h) {
  const Matrix k1 = rhs(y);
  const Matrix k2 = rhs(y + (0.5 * h) * k1);
  const Matrix k3 = rhs(y + (0.5 * h) * k2);
  const Matrix k4 = rhs(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void validate_density(const SpinSystem &system, const Matrix &rho) {
  require_dim(system, rho, "initial density matrix");
  if (max_abs(rho - rho.adjoint()) > 1e-10)
    throw ValidationError("initial density matrix is not Hermitian");
  const double tr = real_trace(rho);
  if (!(tr > 0.0) || !std::isfinite(tr))
    throw ValidationError("initial density matrix must have positive trace");
  if (min_eigenvalue(rho) < -1e-9)
    throw ValidationError("initial density matrix is not positive semidefinite");
}

} // namespace detail

/// Fixed-step classical RK4 of the selected master equation. Observables are
/// recorded at every grid point. Every `monitor_stride` steps the step is
/// repeated as two half steps; a Richardson estimate above tolerance throws
/// StepTooLargeError so the caller can refine h. The trajectory halts early
/// (with `halt` set) when Tr rho drops below the floor or an eigenvalue
/// drops below -positivity_tolerance.
inline Trajectory integrate(const SpinSystem &system, const Matrix &h,
                            const Matrix &rho0, const ModelSpec &spec,
                            const TimeGrid &grid,
                            const IntegrateOptions &options = {}) {
  validate(spec);
  validate(grid);
  detail::require_dim(system, h, "Hamiltonian");
  detail::require_hermitian(h);
  detail::validate_density(system, rho0);

  const double trace0 = real_trace(rho0);
  ModelSpec model = spec;
  model.trace_floor = options.trace_floor * trace0;

  Trajectory traj;
  traj.model = model;
  traj.step = grid.step;
  const std::size_t n = grid.steps();
  traj.times.reserve(n + 1);

  auto rhs = [&](const Matrix &rho) {
    return evaluate_rhs(system, h, rho, model).total;
  };

  // Returns false when the state can no longer be recorded.
  auto record = [&](double t, const Matrix &rho) {
    const double tr = real_trace(rho);
    if (!(tr > model.trace_floor)) {
      traj.halt = HaltReason::trace_floor;
      return false;
    }
    traj.times.push_back(t);
    traj.qs_expect.push_back(singlet_population(system, rho) / trace0);
    traj.trace.push_back(tr / trace0);
    traj.p_coh.push_back(
        coherence_measure(system, rho, model.coherence, model.trace_floor));
    traj.tilde_norm.push_back(
        hermitian_trace_norm(decompose(system, rho).rho_tilde) / trace0);
    return true;
  };

  Matrix rho = rho0;
  if (!record(grid.t0, rho))
    return traj;
  traj.min_eigenvalue = detail::min_eigenvalue(rho) / trace0;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid.t0 + static_cast<double>(i) * grid.step;
    const double step = std::min(grid.step, grid.t_end - t);
    if (!(real_trace(rho) > model.trace_floor)) {
      traj.halt = HaltReason::trace_floor;
      break;
    }
    const bool monitor =
        options.monitor_stride != 0 && i % options.monitor_stride == 0;
    Matrix next;
    try {
      next = detail::rk4_step(rhs, rho, step);
      if (monitor) {
        const Matrix half = detail::rk4_step(rhs, rho, 0.5 * step);
        const Matrix twice = detail::rk4_step(rhs, half, 0.5 * step);
        const double scale = std::max(detail::max_abs(next), model.trace_floor);
        const double err = detail::max_abs(next - twice) / 15.0 / scale;
        traj.max_error_estimate = std::max(traj.max_error_estimate, err);
        if (!std::isfinite(err) || err > options.richardson_tolerance)
          throw StepTooLargeError(
              "step " + std::to_string(step) + " too large at t = " +
              std::to_string(t) + " (relative error estimate " +
              std::to_string(err) + "); refine the time step");
      }
    } catch (const TraceFloorError &) {
      // A stage state fell below the floor: the ensemble has recombined.
      traj.halt = HaltReason::trace_floor;
      break;
    }
    if (!next.allFinite())
      throw NumericalError("non-finite density matrix at t = " +
                           std::to_string(t + step));
    rho = std::move(next);

    if (monitor) {
      const double lowest = detail::min_eigenvalue(rho) / trace0;
      traj.min_eigenvalue = std::min(traj.min_eigenvalue, lowest);
      if (lowest < -options.positivity_tolerance) {
        traj.halt = HaltReason::positivity;
        break;
      }
    }
    const double t_next =
        (i + 1 == n) ? grid.t_end
                     : grid.t0 + static_cast<double>(i + 1) * grid.step;
    if (!record(t_next, rho))
      break;
  }
  return traj;
}

/// Expected photon counts per bin: N_k = N0 * integral of k_S qs_expect dt
/// over the bin, by the trapezoidal rule on the recorded grid. Only bins that
/// are fully covered by uniform steps are produced.
inline BinnedExpectation bin_counts(const Trajectory &traj, double delta_t,
                                    double n0) {
  if (!(n0 > 0.0) || !std::isfinite(n0))
    throw ValidationError("ensemble size N0 must be positive");
  if (!(delta_t > 0.0) || !std::isfinite(delta_t))
    throw ValidationError("bin width must be positive");
  if (traj.step <= 0.0)
    throw ValidationError("trajectory has no step size");
  const double ratio = delta_t / traj.step;
  const double m_real = std::round(ratio);
  if (m_real < 1.0 ||
      std::abs(m_real * traj.step - delta_t) > 1e-9 * std::max(1.0, delta_t))
    throw ValidationError("bin width " + std::to_string(delta_t) +
                          " is not an integer multiple of the step " +
                          std::to_string(traj.step));
  const auto m = static_cast<std::size_t>(m_real);

  BinnedExpectation out;
  out.k_s = traj.model.k_s;
  if (traj.size() == 0)
    return out;
  const double t0 = traj.times.front();
  out.edges.push_back(t0);
  const double weight = n0 * traj.model.k_s * traj.step;
  for (std::size_t k = 0;; ++k) {
    const std::size_t lo = k * m;
    const std::size_t hi = lo + m;
    if (hi >= traj.size())
      break;
    const double edge = t0 + static_cast<double>(k + 1) * delta_t;
    if (std::abs(traj.times[hi] - edge) > 1e-9 * std::max(1.0, edge))
      break; // truncated final step
    double sum = 0.5 * (traj.qs_expect[lo] + traj.qs_expect[hi]);
    for (std::size_t j = lo + 1; j < hi; ++j)
      sum += traj.qs_expect[j];
    out.expected.push_back(std::max(0.0, weight * sum));
    out.edges.push_back(edge);
  }
  if (out.expected.empty())
    out.edges.clear();
  return out;
}

/// delta n for a sequence of counts `numerator` normalized by `expected`:
///   text_k = (c_{k+1} - c_k) / N_k, fig_k = -text_k.
template <typename Counts>
DeltaN normalized_differences(const Counts &counts,
                              const std::vector<double> &expected) {
  DeltaN out;
  const std::size_t n = expected.size();
  if (n < 2)
    return out;
  out.text.reserve(n - 1);
  out.fig.reserve(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!(expected[k] > 0.0)) {
      out.text.emplace_back();
      out.fig.emplace_back();
      continue;
    }
    const double diff = (static_cast<double>(counts[k + 1]) -
                         static_cast<double>(counts[k])) /
                        expected[k];
    out.text.emplace_back(diff);
    out.fig.emplace_back(-diff);
  }
  return out;
}

inline DeltaN delta_n_expected(const BinnedExpectation &bins) {
  if (bins.size() < 2)
    throw ValidationError("delta n needs at least two bins");
  return normalized_differences(bins.expected, bins.expected);
}

/// Default step: min(1/(200 k_S), T_osc/50), shrunk so that it divides the
/// bin width exactly.
inline double default_step(double k_s, double omega_diff, double delta_t) {
  double h = 1.0 / (200.0 * k_s);
  if (omega_diff != 0.0)
    h = std::min(h, 2.0 * std::numbers::pi / std::abs(omega_diff) / 50.0);
  if (delta_t > 0.0)
    h = delta_t / std::ceil(delta_t / h - 1e-9);
  return h;
}

} // namespace radpair
