#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "radpair/error.hpp"
#include "radpair/master_equations.hpp"
#include "radpair/photon_stats.hpp"
#include "radpair/pipeline/csv.hpp"
#include "radpair/trajectory.hpp"

namespace radpair::pipeline {

/// Output of one model run: trajectory, binned expectation and delta n.
struct ModelRun {
  ModelKind kind = ModelKind::jones_hore;
  Trajectory trajectory;
  BinnedExpectation bins;
  DeltaN delta_n;
};

/// Predicted expectations read back from a bins CSV.
struct PredictedBins {
  std::vector<std::pair<ModelKind, BinnedExpectation>> models;
  double delta_t = 0.0;
  double k_s = 1.0;
};

using Meta = std::vector<std::pair<std::string, std::string>>;

inline CsvTable trajectory_table(const Trajectory &traj, const Meta &meta) {
  CsvTable t;
  t.meta = meta;
  t.meta.emplace_back("model", to_string(traj.model.kind));
  t.meta.emplace_back("step", format_number(traj.step));
  t.header = {"t", "qs_expect", "trace", "p_coh", "tilde_norm"};
  for (std::size_t i = 0; i < traj.size(); ++i)
    t.rows.push_back({format_number(traj.times[i]),
                      format_number(traj.qs_expect[i]),
                      format_number(traj.trace[i]), format_number(traj.p_coh[i]),
                      format_number(traj.tilde_norm[i])});
  return t;
}

inline CsvTable bins_table(const std::vector<ModelRun> &runs, const Meta &meta) {
  CsvTable t;
  t.meta = meta;
  t.header = {"t_bin"};
  for (const auto &run : runs)
    t.header.push_back("N_" + to_string(run.kind));
  const std::size_t n = runs.empty() ? 0 : runs.front().bins.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::string> row{format_number(runs.front().bins.edges[k])};
    for (const auto &run : runs)
      row.push_back(format_number(run.bins.expected[k]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline CsvTable deltan_table(const std::vector<ModelRun> &runs,
                             const Meta &meta) {
  CsvTable t;
  t.meta = meta;
  t.meta.emplace_back("convention",
                      "delta_n_fig = (N_k - N_k+1)/N_k; delta_n_text = -delta_n_fig");
  t.header = {"t_bin"};
  for (const auto &run : runs) {
    const std::string m = to_string(run.kind);
    t.header.insert(t.header.end(),
                    {"delta_n_fig_" + m, "delta_n_text_" + m,
                     "sigma_exact_" + m, "sigma_simplified_" + m});
  }
  const std::size_t n = runs.empty() ? 0 : runs.front().delta_n.fig.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::string> row{format_number(runs.front().bins.edges[k])};
    for (const auto &run : runs) {
      row.push_back(format_optional(run.delta_n.fig[k]));
      row.push_back(format_optional(run.delta_n.text[k]));
      const double nk = run.bins.expected[k];
      if (nk > 0.0) {
        const SigmaDeltaN s = sigma_delta_n(nk, run.bins.expected[k + 1]);
        row.push_back(format_number(s.exact));
        row.push_back(format_number(s.simplified));
      } else {
        row.insert(row.end(), {"", ""});
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline CsvTable counts_table(const std::vector<CountSeries> &trials,
                             const Meta &meta) {
  CsvTable t;
  t.meta = meta;
  t.header = {"trial", "t_bin", "n"};
  for (const auto &series : trials)
    for (std::size_t k = 0; k < series.size(); ++k)
      t.rows.push_back({format_number(series.trial),
                        format_number(series.edges[k]),
                        format_number(series.sampled[k])});
  return t;
}

inline CsvTable sampled_deltan_table(const std::vector<CountSeries> &trials,
                                     const Meta &meta) {
  CsvTable t;
  t.meta = meta;
  t.header = {"trial", "t_bin", "delta_n_text", "delta_n_fig"};
  for (const auto &series : trials) {
    const DeltaN dn = delta_n_sampled(series);
    for (std::size_t k = 0; k < dn.text.size(); ++k)
      t.rows.push_back({format_number(series.trial),
                        format_number(series.edges[k]),
                        format_optional(dn.text[k]),
                        format_optional(dn.fig[k])});
  }
  return t;
}

namespace detail {

inline double meta_number(const CsvTable &t, std::string_view key,
                          const std::filesystem::path &path) {
  const auto v = t.meta_value(key);
  if (!v)
    throw ValidationError(path.string() + ": missing '# " + std::string(key) +
                          ":' metadata line");
  return parse_double(*v, 0, key);
}

/// Edges from bin start times; width checked uniform within 1e-6 relative.
inline std::vector<double> edges_from_starts(const std::vector<double> &starts,
                                             std::optional<double> width,
                                             const std::vector<std::size_t> &lines,
                                             const std::filesystem::path &path) {
  std::vector<double> edges = starts;
  if (starts.empty())
    return edges;
  for (std::size_t k = 1; k < starts.size(); ++k)
    if (!(starts[k] > starts[k - 1]))
      throw ValidationError(path.string() + " line " + std::to_string(lines[k]) +
                            ": bin times must increase monotonically");
  if (starts.size() >= 2) {
    const double w = starts[1] - starts[0];
    for (std::size_t k = 2; k < starts.size(); ++k) {
      const double wk = starts[k] - starts[k - 1];
      if (std::abs(wk - w) > 1e-6 * std::abs(w))
        throw ValidationError(path.string() + " line " +
                              std::to_string(lines[k]) +
                              ": non-uniform bin width");
    }
    if (width && std::abs(*width - w) > 1e-6 * std::abs(w))
      throw ValidationError(path.string() +
                            ": bin width disagrees with delta_t metadata");
    width = w;
  }
  if (!width)
    throw ValidationError(path.string() +
                          ": cannot infer bin width from a single bin");
  edges.push_back(starts.back() + *width);
  return edges;
}

} // namespace detail

inline PredictedBins read_bins(const std::filesystem::path &path) {
  const CsvTable t = read_csv(path);
  PredictedBins out;
  out.delta_t = detail::meta_number(t, "delta_t", path);
  out.k_s = detail::meta_number(t, "k_S", path);
  const auto tcol = t.column("t_bin");
  if (!tcol)
    throw ValidationError(path.string() + ": missing t_bin column");
  std::vector<double> starts;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    starts.push_back(parse_double(t.rows[r][*tcol], t.lines[r], "t_bin"));
  const auto edges =
      detail::edges_from_starts(starts, out.delta_t, t.lines, path);
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const std::string &name = t.header[c];
    if (name.rfind("N_", 0) != 0)
      continue;
    BinnedExpectation bins;
    bins.k_s = out.k_s;
    bins.edges = edges;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const double v = parse_double(t.rows[r][c], t.lines[r], name);
      if (!(v >= 0.0))
        throw ValidationError(path.string() + " line " +
                              std::to_string(t.lines[r]) +
                              ": negative expected count");
      bins.expected.push_back(v);
    }
    out.models.emplace_back(parse_model_kind(name.substr(2)), std::move(bins));
  }
  if (out.models.empty())
    throw ValidationError(path.string() + ": no N_<model> columns");
  return out;
}

/// Reads every trial of a count file. Accepts `t_bin,n` (a single trial) or
/// `trial,t_bin,n` as written by the sample command.
inline std::vector<CountSeries>
ingest_count_trials(const std::filesystem::path &path) {
  const CsvTable t = read_csv(path);
  const auto tcol = t.column("t_bin");
  const auto ncol = t.column("n");
  const auto trial_col = t.column("trial");
  if (!tcol || !ncol)
    throw ValidationError(path.string() + ": header must contain t_bin and n");
  std::optional<double> width;
  if (auto w = t.meta_value("delta_t"))
    width = parse_double(*w, 0, "delta_t");
  std::uint64_t seed = 0;
  if (auto s = t.meta_value("seed"))
    seed = parse_count(*s, 0, "seed");

  std::vector<CountSeries> out;
  std::vector<std::vector<double>> starts;
  std::vector<std::vector<std::size_t>> lines;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t line = t.lines[r];
    const std::uint64_t trial =
        trial_col ? parse_count(t.rows[r][*trial_col], line, "trial") : 0;
    if (out.empty() || out.back().trial != trial) {
      for (const auto &s : out)
        if (s.trial == trial)
          throw ValidationError(path.string() + " line " +
                                std::to_string(line) + ": trial " +
                                std::to_string(trial) + " is not contiguous");
      CountSeries s;
      s.trial = trial;
      s.seed = seed;
      out.push_back(std::move(s));
      starts.emplace_back();
      lines.emplace_back();
    }
    starts.back().push_back(parse_double(t.rows[r][*tcol], line, "t_bin"));
    lines.back().push_back(line);
    out.back().sampled.push_back(parse_count(t.rows[r][*ncol], line, "count"));
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].edges =
        detail::edges_from_starts(starts[i], width, lines[i], path);
  return out;
}

inline CountSeries ingest_counts(const std::filesystem::path &path,
                                 std::uint64_t trial = 0) {
  auto all = ingest_count_trials(path);
  if (all.empty())
    throw ValidationError(path.string() + ": no count rows");
  for (auto &s : all)
    if (s.trial == trial)
      return std::move(s);
  throw ValidationError(path.string() + ": no trial " + std::to_string(trial));
}

} // namespace radpair::pipeline
