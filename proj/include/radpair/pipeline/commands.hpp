#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <vector>

#include "radpair/master_equations.hpp"
#include "radpair/photon_stats.hpp"
#include "radpair/pipeline/compare.hpp"
#include "radpair/pipeline/config.hpp"
#include "radpair/pipeline/csv.hpp"
#include "radpair/pipeline/files.hpp"
#include "radpair/spin_hilbert.hpp"
#include "radpair/trajectory.hpp"

namespace radpair::pipeline {

inline Meta run_metadata(const RunConfig &c) {
  return {{"seed", format_number(c.seed)},
          {"config_hash", config_hash(c)},
          {"version", artifact_version},
          {"k_S", format_number(c.k_s)},
          {"delta_t", format_number(c.delta_t())},
          {"N0", format_number(c.n0)},
          {"models", models_to_string(c.models)}};
}

/// Hamiltonian of the configured pair: Zeeman plus isotropic hyperfine,
/// with frequencies converted from units of k_S.
inline Matrix configured_hamiltonian(const RunConfig &c,
                                     const SpinSystem &system) {
  std::vector<HyperfineCoupling> couplings = c.hyperfine;
  for (auto &hf : couplings)
    hf.coupling *= c.k_s;
  return zeeman_hamiltonian(system, c.omega1_per_ks * c.k_s,
                            c.omega2_per_ks * c.k_s) +
         hyperfine_hamiltonian(system, couplings);
}

inline constexpr int max_step_refinements = 6;

/// Integrates every configured model from the singlet state (models run
/// concurrently) and bins the result. A zero-length run yields empty series.
inline std::vector<ModelRun> run_models(const RunConfig &c) {
  validate(c);
  const SpinSystem system = build_system(c.spins);
  const Matrix h = configured_hamiltonian(c, system);
  const Matrix rho0 = singlet_density(system);
  const TimeGrid grid{0.0, c.t_end(), c.step()};

  auto run_one = [&](ModelKind kind) {
    ModelRun run;
    run.kind = kind;
    run.trajectory.model = c.model_spec(kind);
    run.trajectory.step = grid.step;
    run.bins.k_s = c.k_s;
    if (c.t_end() <= 0.0)
      return run;
    // A defaulted step is halved (keeping it a divisor of delta_t) when the
    // error monitor rejects it; an explicitly configured step is honoured.
    TimeGrid attempt = grid;
    for (int refinements = 0;; ++refinements) {
      try {
        run.trajectory = integrate(system, h, rho0, c.model_spec(kind), attempt);
        break;
      } catch (const StepTooLargeError &e) {
        if (c.step_ks || refinements >= max_step_refinements)
          throw StepTooLargeError(to_string(kind) + ": " + e.what());
        attempt.step *= 0.5;
      }
    }
    if (run.trajectory.halt == HaltReason::positivity)
      throw NumericalError(to_string(kind) +
                           ": positivity violated (min eigenvalue " +
                           std::to_string(run.trajectory.min_eigenvalue) + ")");
    run.bins = bin_counts(run.trajectory, c.delta_t(), c.n0);
    if (run.bins.size() >= 2)
      run.delta_n = delta_n_expected(run.bins);
    return run;
  };

  std::vector<std::future<ModelRun>> pending;
  for (ModelKind kind : c.models)
    pending.push_back(std::async(std::launch::async, run_one, kind));
  std::vector<ModelRun> runs;
  for (auto &f : pending)
    runs.push_back(f.get());
  return runs;
}

inline void ensure_directory(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir.string() + ": " +
                  ec.message());
}

struct SimulateOutputs {
  std::vector<std::filesystem::path> trajectories;
  std::filesystem::path bins;
  std::filesystem::path deltan;
  std::vector<ModelRun> runs;
};

/// Writes trajectory_<model>.csv, bins.csv and deltan.csv under `out_dir`.
inline SimulateOutputs cmd_simulate(const RunConfig &c,
                                    const std::filesystem::path &out_dir) {
  SimulateOutputs out;
  out.runs = run_models(c);
  ensure_directory(out_dir);
  const Meta meta = run_metadata(c);
  for (const auto &run : out.runs) {
    auto path = out_dir / ("trajectory_" + to_string(run.kind) + ".csv");
    write_csv(path, trajectory_table(run.trajectory, meta));
    out.trajectories.push_back(std::move(path));
  }
  out.bins = out_dir / "bins.csv";
  write_csv(out.bins, bins_table(out.runs, meta));
  out.deltan = out_dir / "deltan.csv";
  write_csv(out.deltan, deltan_table(out.runs, meta));
  return out;
}

struct SampleOutputs {
  std::filesystem::path bins;
  std::vector<std::filesystem::path> counts;
  std::vector<std::filesystem::path> sampled_deltan;
  std::vector<std::vector<CountSeries>> trials; // per model
  std::vector<ModelRun> runs;
};

/// Poisson-samples `trials` experiments per model. Writes bins.csv,
/// counts_<model>.csv and sampled_deltan_<model>.csv.
inline SampleOutputs cmd_sample(const RunConfig &c, std::size_t trials,
                                const std::filesystem::path &out_dir) {
  if (trials == 0)
    throw ValidationError("--trials must be at least 1");
  SampleOutputs out;
  out.runs = run_models(c);
  ensure_directory(out_dir);
  Meta meta = run_metadata(c);
  out.bins = out_dir / "bins.csv";
  write_csv(out.bins, bins_table(out.runs, meta));
  meta.emplace_back("trials", format_number(static_cast<std::uint64_t>(trials)));
  for (const auto &run : out.runs) {
    const std::string m = to_string(run.kind);
    Meta model_meta = meta;
    model_meta.emplace_back("model", m);
    auto series = run.bins.size() == 0
                      ? std::vector<CountSeries>{}
                      : monte_carlo_counts(run.bins, trials, c.seed);
    auto counts_path = out_dir / ("counts_" + m + ".csv");
    write_csv(counts_path, counts_table(series, model_meta));
    auto dn_path = out_dir / ("sampled_deltan_" + m + ".csv");
    write_csv(dn_path, sampled_deltan_table(series, model_meta));
    out.counts.push_back(std::move(counts_path));
    out.sampled_deltan.push_back(std::move(dn_path));
    out.trials.push_back(std::move(series));
  }
  return out;
}

/// Scores the predicted bins file against one trial of an observed count file.
/// When `report_path` is non-empty the JSON report is written there.
inline ComparisonReport cmd_compare(const std::filesystem::path &predicted,
                                    const std::filesystem::path &observed,
                                    std::uint64_t trial = 0,
                                    const std::filesystem::path &report_path = {}) {
  const PredictedBins bins = read_bins(predicted);
  const CountSeries counts = ingest_counts(observed, trial);
  ComparisonReport report = compare_counts(bins, counts);
  if (!report_path.empty()) {
    if (report_path.has_parent_path())
      ensure_directory(report_path.parent_path());
    std::ofstream out(report_path, std::ios::trunc);
    if (!out)
      throw IoError("cannot write report " + report_path.string());
    out << to_json(report).dump(2) << '\n';
  }
  return report;
}

/// Skellam pmf formatted with 15 significant digits.
inline std::string cmd_skellam(long long k, double n1, double n2) {
  const double p = skellam_pmf(k, {n1, n2});
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", p);
  return buf;
}

} // namespace radpair::pipeline
