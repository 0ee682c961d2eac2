#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "radpair/envelope.hpp"
#include "radpair/error.hpp"
#include "radpair/pipeline/files.hpp"
#include "radpair/trajectory.hpp"

namespace radpair::pipeline {

inline constexpr std::size_t min_usable_bins = 8;

struct ModelScore {
  ModelKind model = ModelKind::jones_hore;
  double chi2 = 0.0;
  std::size_t dof = 0;
  /// Fitted ratio of observed to predicted total counts.
  double scale = 1.0;
  /// Envelope of the model's predicted delta n.
  EnvelopeFit envelope;
  double k_s = 1.0;

  double envelope_rate_per_ks() const { return envelope.rate / k_s; }
};

struct ComparisonReport {
  std::vector<ModelScore> scores;
  ModelKind preferred = ModelKind::jones_hore;
  std::size_t bins_used = 0;
  /// Envelope of the observed delta n normalized by the observed counts.
  EnvelopeFit observed_envelope;
  double k_s = 1.0;
};

/// Scores each model's binned expectation against observed counts.
///
/// For model m with expectation N_k and a fitted overall scale
/// s = sum(n) / sum(N), the observed and predicted delta n are
///   (n_{k+1} - n_k) / (s N_k)  and  (N_{k+1} - N_k) / N_k
/// with the exact per-bin sigma sqrt(s N_k + s N_{k+1}) / (s N_k). The
/// chi-square sums their squared standardized residual over usable bins;
/// dof = usable bins - 1 (the scale).
inline ComparisonReport
compare_models(std::span<const std::pair<ModelKind, BinnedExpectation>> predicted,
               std::span<const double> observed) {
  if (predicted.empty())
    throw ValidationError("no predicted models to compare");
  ComparisonReport report;
  report.k_s = predicted.front().second.k_s;

  for (const auto &[kind, bins] : predicted) {
    if (bins.size() != observed.size())
      throw ValidationError("observed series has " +
                            std::to_string(observed.size()) +
                            " bins, prediction for " + to_string(kind) +
                            " has " + std::to_string(bins.size()));
    const auto &nk = bins.expected;
    double total_n = 0.0, total_obs = 0.0;
    for (std::size_t k = 0; k < nk.size(); ++k) {
      total_n += nk[k];
      total_obs += observed[k];
    }
    ModelScore score;
    score.model = kind;
    score.k_s = bins.k_s;
    score.scale = total_n > 0.0 ? total_obs / total_n : 1.0;
    if (!(score.scale > 0.0))
      throw UnderdeterminedError("observed series has no counts");

    std::size_t usable = 0;
    for (std::size_t k = 0; k + 1 < nk.size(); ++k) {
      if (!(nk[k] > 0.0))
        continue;
      const double var = score.scale * (nk[k] + nk[k + 1]);
      const double resid = (observed[k + 1] - observed[k]) -
                           score.scale * (nk[k + 1] - nk[k]);
      score.chi2 += resid * resid / var;
      ++usable;
    }
    if (usable < min_usable_bins)
      throw UnderdeterminedError("only " + std::to_string(usable) +
                                 " usable bins; at least " +
                                 std::to_string(min_usable_bins) +
                                 " are needed");
    score.dof = usable - 1;
    report.bins_used = usable;

    const DeltaN dn = delta_n_expected(bins);
    score.envelope = fit_envelope(
        std::span<const double>(bins.edges.data(), dn.fig.size()), dn.fig);
    report.scores.push_back(std::move(score));
  }

  std::vector<double> obs(observed.begin(), observed.end());
  const DeltaN observed_dn = normalized_differences(obs, obs);
  report.observed_envelope = fit_envelope(
      std::span<const double>(predicted.front().second.edges.data(),
                              observed_dn.fig.size()),
      observed_dn.fig);

  const ModelScore *best = &report.scores.front();
  for (const auto &s : report.scores)
    if (s.chi2 < best->chi2)
      best = &s;
  report.preferred = best->model;
  return report;
}

/// Grid check plus scoring for an ingested count series.
inline ComparisonReport compare_counts(const PredictedBins &predicted,
                                       const CountSeries &observed) {
  const auto &edges = predicted.models.front().second.edges;
  if (observed.edges.size() != edges.size())
    throw ValidationError("bin grids differ: observed has " +
                          std::to_string(observed.size()) +
                          " bins, predicted has " +
                          std::to_string(edges.empty() ? 0 : edges.size() - 1));
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (std::abs(observed.edges[k] - edges[k]) > 1e-9)
      throw ValidationError("bin grids differ at edge " + std::to_string(k));
  std::vector<double> counts(observed.sampled.begin(), observed.sampled.end());
  return compare_models(predicted.models, counts);
}

inline nlohmann::json envelope_json(const EnvelopeFit &fit, double k_s) {
  nlohmann::json j;
  j["rate_per_kS"] = fit.ok ? nlohmann::json(fit.rate / k_s) : nlohmann::json(nullptr);
  j["r_squared"] = fit.r_squared;
  j["peaks"] = fit.peak_times.size();
  j["fit_quality"] = !fit.ok ? "failed" : (fit.r_squared < 0.5 ? "poor" : "good");
  return j;
}

inline nlohmann::json to_json(const ComparisonReport &r) {
  nlohmann::json j;
  j["preferred"] = to_string(r.preferred);
  j["bins_used"] = r.bins_used;
  j["models"] = nlohmann::json::array();
  for (const auto &s : r.scores) {
    nlohmann::json m;
    m["model"] = to_string(s.model);
    m["chi2"] = s.chi2;
    m["dof"] = s.dof;
    m["scale"] = s.scale;
    m["envelope_rate_per_kS"] = s.envelope.ok
                                    ? nlohmann::json(s.envelope_rate_per_ks())
                                    : nlohmann::json(nullptr);
    m["envelope"] = envelope_json(s.envelope, s.k_s);
    m["preferred"] = s.model == r.preferred;
    j["models"].push_back(std::move(m));
  }
  j["observed_envelope"] = envelope_json(r.observed_envelope, r.k_s);
  return j;
}

inline std::string to_text(const ComparisonReport &r) {
  std::ostringstream os;
  os << "bins used: " << r.bins_used << '\n';
  for (const auto &s : r.scores) {
    os << to_string(s.model) << ": chi2 = " << s.chi2 << " (dof " << s.dof
       << ", chi2/dof " << (s.dof ? s.chi2 / static_cast<double>(s.dof) : 0.0)
       << "), envelope rate = ";
    if (s.envelope.ok)
      os << s.envelope_rate_per_ks() << " k_S";
    else
      os << "n/a";
    if (s.envelope.ok && s.envelope.r_squared < 0.5)
      os << " [poor fit, R^2 = " << s.envelope.r_squared << "]";
    os << '\n';
  }
  os << "observed envelope rate = ";
  if (r.observed_envelope.ok)
    os << r.observed_envelope.rate / r.k_s << " k_S";
  else
    os << "n/a";
  os << '\n' << "preferred model: " << to_string(r.preferred) << '\n';
  return os.str();
}

} // namespace radpair::pipeline
