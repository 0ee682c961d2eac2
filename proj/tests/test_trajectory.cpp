#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "radpair/trajectory.hpp"
#include "test_support.hpp"

using namespace radpair;

namespace {

ModelSpec spec_for(ModelKind kind, double k_s = 1.0, double k_sr = 0.0) {
  ModelSpec s;
  s.kind = kind;
  s.k_s = k_s;
  s.k_sr = k_sr;
  return s;
}

const std::vector<ModelKind> all_models{ModelKind::jones_hore, ModelKind::kominis,
                                        ModelKind::haberkorn};

Trajectory mixing_run(ModelKind kind, double step, double t_end, double omega = 20.0,
                      double k_sr = 0.0) {
  const SpinSystem sys = build_system({});
  const Matrix h = zeeman_hamiltonian(sys, omega / 2.0, -omega / 2.0);
  IntegrateOptions opts;
  opts.richardson_tolerance = 1e-4;
  return integrate(sys, h, singlet_density(sys), spec_for(kind, 1.0, k_sr),
                   {0.0, t_end, step}, opts);
}

Trajectory mixing_run_strict(ModelKind kind, double step) {
  const SpinSystem sys = build_system({});
  const Matrix h = zeeman_hamiltonian(sys, 10.0, -10.0);
  return integrate(sys, h, singlet_density(sys), spec_for(kind), {0.0, 1.0, step});
}

/// Synthetic trajectory qs(t) = f(t) on a uniform grid.
template <typename F>
Trajectory synthetic(F f, double step, std::size_t n, double k_s = 1.0) {
  Trajectory t;
  t.step = step;
  t.model.k_s = k_s;
  for (std::size_t i = 0; i <= n; ++i) {
    const double time = static_cast<double>(i) * step;
    t.times.push_back(time);
    t.qs_expect.push_back(f(time));
  }
  return t;
}

} // namespace

TEST(TimeGrid, StepCount) {
  EXPECT_EQ((TimeGrid{0.0, 1.0, 0.1}.steps()), 10u);
  EXPECT_EQ((TimeGrid{0.0, 1.05, 0.1}.steps()), 11u);
  EXPECT_THROW(validate(TimeGrid{0.0, 1.0, 2.0}), ValidationError);
  EXPECT_THROW(validate(TimeGrid{0.0, 1.0, 0.0}), ValidationError);
}

TEST(Integrate, PureSingletDecaysExponentiallyInEveryModel) {
  const SpinSystem sys = build_system({});
  for (ModelKind kind : all_models) {
    const auto traj = integrate(sys, Matrix::Zero(4, 4), singlet_density(sys),
                                spec_for(kind), {0.0, 5.0, 1.0 / 200.0});
    ASSERT_EQ(traj.size(), 1001u);
    EXPECT_EQ(traj.halt, HaltReason::none);
    for (std::size_t i = 0; i < traj.size(); ++i)
      EXPECT_NEAR(traj.qs_expect[i], std::exp(-traj.times[i]), 1e-8)
          << to_string(kind) << " t=" << traj.times[i];
    EXPECT_DOUBLE_EQ(traj.times.back(), 5.0);
  }
}

TEST(Integrate, UnitaryRabiOscillation) {
  const SpinSystem sys = build_system({});
  const double w = 2.0;
  const Matrix h = zeeman_hamiltonian(sys, w / 2.0, -w / 2.0);
  const auto traj = integrate(sys, h, singlet_density(sys),
                              spec_for(ModelKind::jones_hore, 0.0),
                              {0.0, 5.0, 1.0 / 200.0});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_NEAR(traj.qs_expect[i], std::pow(std::cos(w * traj.times[i] / 2.0), 2), 1e-8);
    EXPECT_NEAR(traj.trace[i], 1.0, 1e-12);
  }
}

TEST(Integrate, FourthOrderConvergence) {
  for (ModelKind kind : {ModelKind::jones_hore, ModelKind::haberkorn}) {
    const auto ref = mixing_run(kind, 0.02 / 16.0, 2.0);
    double errors[2] = {0.0, 0.0};
    const double steps[2] = {0.02, 0.01};
    for (int s = 0; s < 2; ++s) {
      const auto run = mixing_run(kind, steps[s], 2.0);
      const std::size_t stride = static_cast<std::size_t>(std::lround(steps[s] / (0.02 / 16.0)));
      for (std::size_t i = 0; i < run.size(); ++i)
        errors[s] = std::max(errors[s],
                             std::abs(run.qs_expect[i] - ref.qs_expect[i * stride]));
    }
    EXPECT_GT(errors[0] / errors[1], 8.0) << to_string(kind);
  }
}

TEST(Integrate, TraceDecayIdentityAlongTrajectory) {
  // Five-point derivative of the recorded trace vs k_S <Q_S>.
  const double h = 1.0 / 1000.0;
  for (ModelKind kind : all_models) {
    const auto traj = mixing_run(kind, h, 2.0, 20.0, kind == ModelKind::kominis ? 0.0 : 0.3);
    double peak = 0.0;
    for (double q : traj.qs_expect)
      peak = std::max(peak, q);
    for (std::size_t i = 2; i + 2 < traj.size(); ++i) {
      const auto &tr = traj.trace;
      const double deriv =
          (-tr[i + 2] + 8.0 * tr[i + 1] - 8.0 * tr[i - 1] + tr[i - 2]) / (12.0 * h);
      EXPECT_NEAR(-deriv, traj.qs_expect[i], 1e-6 * peak) << to_string(kind) << " i=" << i;
    }
    for (std::size_t i = 1; i < traj.size(); ++i) {
      EXPECT_LE(traj.trace[i], traj.trace[i - 1] + 1e-15);
      EXPECT_GE(traj.qs_expect[i], -1e-12);
      EXPECT_LE(traj.qs_expect[i], traj.trace[i] + 1e-12);
      EXPECT_GE(traj.p_coh[i], 0.0);
      EXPECT_LE(traj.p_coh[i], 1.0);
    }
  }
}

TEST(Integrate, HaltsAtTraceFloor) {
  const SpinSystem sys = build_system({});
  const auto traj = integrate(sys, Matrix::Zero(4, 4), singlet_density(sys),
                              spec_for(ModelKind::kominis), {0.0, 40.0, 0.01});
  EXPECT_EQ(traj.halt, HaltReason::trace_floor);
  EXPECT_LT(traj.times.back(), 40.0);
  EXPECT_GT(traj.trace.back(), 1e-12);
}

TEST(Integrate, StepTooLargeIsReported) {
  const SpinSystem sys = build_system({});
  const Matrix h = zeeman_hamiltonian(sys, 1000.0, -1000.0);
  EXPECT_THROW(integrate(sys, h, singlet_density(sys), spec_for(ModelKind::jones_hore),
                         {0.0, 1.0, 0.01}),
               StepTooLargeError);
}

TEST(Integrate, NonSmoothCoherenceAtSingletStartNeedsFinerStep) {
  // The trace-norm p_coh jumps from 0 to ~1 as soon as coherence appears, so
  // the Kominis generator is only Lipschitz at the pure singlet and the first
  // step's error estimate scales as h^2 instead of h^5.
  EXPECT_THROW(mixing_run_strict(ModelKind::kominis, 0.005), StepTooLargeError);
  EXPECT_NO_THROW(mixing_run_strict(ModelKind::kominis, 0.0025));
  EXPECT_NO_THROW(mixing_run_strict(ModelKind::jones_hore, 0.005));
}

TEST(Integrate, RejectsInvalidInitialState) {
  const SpinSystem sys = build_system({});
  Matrix bad = test::singlet_projector() - 0.1 * test::triplet_zero_projector();
  EXPECT_THROW(integrate(sys, Matrix::Zero(4, 4), bad, spec_for(ModelKind::jones_hore),
                         {0.0, 1.0, 0.01}),
               ValidationError);
  EXPECT_THROW(integrate(sys, Matrix::Zero(4, 4), Matrix::Zero(4, 4),
                         spec_for(ModelKind::jones_hore), {0.0, 1.0, 0.01}),
               ValidationError);
}

TEST(BinCounts, ExponentialFirstBin) {
  const auto traj = synthetic([](double t) { return std::exp(-t); }, 1.0 / 200.0, 1000);
  const auto bins = bin_counts(traj, 0.25, 1e12);
  ASSERT_EQ(bins.size(), 20u);
  ASSERT_EQ(bins.edges.size(), 21u);
  EXPECT_NEAR(bins.expected[0] / 2.21199216928595e11, 1.0, 5e-6);
  EXPECT_DOUBLE_EQ(bins.width(), 0.25);
}

TEST(BinCounts, FlatZeroTrajectory) {
  const auto traj = synthetic([](double) { return 0.0; }, 0.01, 100);
  for (double n : bin_counts(traj, 0.1, 1e6).expected)
    EXPECT_EQ(n, 0.0);
}

TEST(BinCounts, TotalYieldIsEnsemble) {
  const SpinSystem sys = build_system({});
  const Matrix h = zeeman_hamiltonian(sys, 10.0, -10.0);
  const auto traj = integrate(sys, h, singlet_density(sys),
                              spec_for(ModelKind::jones_hore), {0.0, 20.0, 0.005});
  const auto bins = bin_counts(traj, 0.25, 1e12);
  double total = 0.0;
  for (double n : bins.expected)
    total += n;
  EXPECT_NEAR(total / 1e12, 1.0, 1e-3);
  EXPECT_LE(total, 1e12 * (1.0 + 1e-9));
}

TEST(BinCounts, Errors) {
  const auto traj = synthetic([](double t) { return std::exp(-t); }, 0.01, 100);
  EXPECT_THROW(bin_counts(traj, 0.015, 1e6), ValidationError);
  EXPECT_THROW(bin_counts(traj, 0.005, 1e6), ValidationError);
  EXPECT_THROW(bin_counts(traj, 0.1, 0.0), ValidationError);
}

TEST(BinCounts, DropsPartialFinalBin) {
  const auto traj = synthetic([](double) { return 1.0; }, 0.01, 105);
  const auto bins = bin_counts(traj, 0.1, 10.0);
  ASSERT_EQ(bins.size(), 10u);
  EXPECT_NEAR(bins.expected[3], 1.0, 1e-12);
}

TEST(DeltaN, ExponentialBins) {
  const auto traj = synthetic([](double t) { return std::exp(-t); }, 1.0 / 200.0, 1000);
  const auto dn = delta_n_expected(bin_counts(traj, 0.25, 1e12));
  ASSERT_EQ(dn.text.size(), 19u);
  for (std::size_t k = 0; k < dn.text.size(); ++k) {
    EXPECT_NEAR(*dn.text[k], std::exp(-0.25) - 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(*dn.fig[k], -*dn.text[k]);
  }
}

TEST(DeltaN, SimpleCases) {
  BinnedExpectation constant{{0, 1, 2, 3}, {5.0, 5.0, 5.0}, 1.0};
  for (const auto &v : delta_n_expected(constant).text)
    EXPECT_EQ(*v, 0.0);
  BinnedExpectation two{{0, 1, 2}, {100.0, 150.0}, 1.0};
  const auto dn = delta_n_expected(two);
  EXPECT_DOUBLE_EQ(*dn.text[0], 0.5);
  EXPECT_DOUBLE_EQ(*dn.fig[0], -0.5);
}

TEST(DeltaN, ZeroBinIsUndefined) {
  BinnedExpectation bins{{0, 1, 2, 3}, {10.0, 0.0, 5.0}, 1.0};
  const auto dn = delta_n_expected(bins);
  EXPECT_TRUE(dn.text[0].has_value());
  EXPECT_FALSE(dn.text[1].has_value());
  EXPECT_FALSE(dn.fig[1].has_value());
  BinnedExpectation one{{0, 1}, {10.0}, 1.0};
  EXPECT_THROW(delta_n_expected(one), ValidationError);
}

TEST(DefaultStep, DividesBinWidth) {
  EXPECT_DOUBLE_EQ(default_step(1.0, 20.0, 0.25), 0.005);
  const double fast = default_step(1.0, 200.0, 0.25);
  EXPECT_LE(fast, 2.0 * std::numbers::pi / 200.0 / 50.0);
  EXPECT_NEAR(0.25 / fast, std::round(0.25 / fast), 1e-9);
  EXPECT_DOUBLE_EQ(default_step(2.0, 0.0, 0.0), 1.0 / 400.0);
}
