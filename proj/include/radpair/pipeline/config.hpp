#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "radpair/error.hpp"
#include "radpair/master_equations.hpp"
#include "radpair/spin_hilbert.hpp"
#include "radpair/trajectory.hpp"

namespace radpair::pipeline {

inline constexpr const char *artifact_version = "0.1.0";

/// One run of the pipeline. Rates, frequencies and times are stored in units
/// of k_S (field suffix `_per_kS` for rates and frequencies, `_kS` for times
/// measured in 1/k_S) so that configs are scale-free.
struct RunConfig {
  SpinSpec spins;
  double omega1_per_ks = 10.0;
  double omega2_per_ks = -10.0;
  std::vector<HyperfineCoupling> hyperfine; // couplings in units of k_S
  std::vector<ModelKind> models{ModelKind::jones_hore, ModelKind::kominis};
  double k_s = 1.0;
  double k_sr_per_ks = 0.0;
  double n0 = 1e12;
  double delta_t_ks = 0.25;
  double t_end_ks = 5.0;
  std::optional<double> step_ks;
  std::uint64_t seed = 0;
  CoherenceMeasure coherence = CoherenceMeasure::trace_norm_ratio;
  std::string output_dir = "out";

  double delta_t() const { return delta_t_ks / k_s; }
  double t_end() const { return t_end_ks / k_s; }
  double step() const {
    if (step_ks)
      return *step_ks / k_s;
    return default_step(k_s, (omega1_per_ks - omega2_per_ks) * k_s,
                        delta_t());
  }
  ModelSpec model_spec(ModelKind kind) const {
    ModelSpec spec;
    spec.kind = kind;
    spec.k_s = k_s;
    spec.k_sr = k_sr_per_ks * k_s;
    spec.coherence = coherence;
    return spec;
  }
};

inline std::string models_to_string(const std::vector<ModelKind> &models) {
  std::string out;
  for (std::size_t i = 0; i < models.size(); ++i)
    out += (i ? "," : "") + to_string(models[i]);
  return out;
}

inline std::vector<ModelKind> parse_model_list(const std::string &list) {
  std::vector<ModelKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(parse_model_kind(item));
  if (out.empty())
    throw ValidationError("model list is empty");
  return out;
}

inline nlohmann::json to_json(const RunConfig &c) {
  nlohmann::json j;
  j["nuclei"] = c.spins.nuclei;
  j["omega1_per_kS"] = c.omega1_per_ks;
  j["omega2_per_kS"] = c.omega2_per_ks;
  j["hyperfine"] = nlohmann::json::array();
  for (const auto &h : c.hyperfine)
    j["hyperfine"].push_back({{"electron", h.electron},
                              {"nucleus", h.nucleus},
                              {"A_per_kS", h.coupling}});
  j["models"] = nlohmann::json::array();
  for (auto m : c.models)
    j["models"].push_back(to_string(m));
  j["k_S"] = c.k_s;
  j["k_sr_per_kS"] = c.k_sr_per_ks;
  j["N0"] = c.n0;
  j["delta_t_kS"] = c.delta_t_ks;
  j["t_end_kS"] = c.t_end_ks;
  j["step_kS"] = c.step_ks ? nlohmann::json(*c.step_ks) : nlohmann::json(nullptr);
  j["seed"] = c.seed;
  j["coherence_measure"] = to_string(c.coherence);
  return j;
}

/// Checks every field against the preconditions of the module that consumes
/// it. Throws ValidationError naming the field.
inline void validate(const RunConfig &c) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(c.k_s) || c.k_s <= 0.0)
    throw ValidationError("k_S must be positive");
  if (!finite(c.k_sr_per_ks) || c.k_sr_per_ks < 0.0)
    throw ValidationError("k_sr_per_kS must be non-negative");
  if (!finite(c.omega1_per_ks) || !finite(c.omega2_per_ks))
    throw ValidationError("omega1_per_kS and omega2_per_kS must be finite");
  if (!finite(c.n0) || c.n0 <= 0.0)
    throw ValidationError("N0 must be positive");
  if (!finite(c.delta_t_ks) || c.delta_t_ks <= 0.0)
    throw ValidationError("delta_t_kS must be positive");
  if (!finite(c.t_end_ks) || c.t_end_ks < 0.0)
    throw ValidationError("t_end_kS must be non-negative");
  if (c.models.empty())
    throw ValidationError("at least one model is required");
  if (c.step_ks && (!finite(*c.step_ks) || *c.step_ks <= 0.0))
    throw ValidationError("step_kS must be positive");
  const double h = c.step();
  const double ratio = c.delta_t() / h;
  if (std::round(ratio) < 1.0 ||
      std::abs(std::round(ratio) * h - c.delta_t()) >
          1e-9 * std::max(1.0, c.delta_t()))
    throw ValidationError("delta_t_kS must be an integer multiple of step_kS");
  const SpinSystem system = build_system(c.spins); // validates spins and cap
  for (const auto &hf : c.hyperfine) {
    if (hf.electron > 1 || hf.nucleus >= system.nuclear.size())
      throw ValidationError("hyperfine coupling index out of range");
    if (!finite(hf.coupling))
      throw ValidationError("hyperfine coupling must be finite");
  }
}

inline RunConfig config_from_json(const nlohmann::json &j) {
  RunConfig c;
  if (!j.is_object())
    throw ValidationError("config must be a JSON object");
  static const std::vector<std::string> known{
      "nuclei",     "omega1_per_kS", "omega2_per_kS", "hyperfine",
      "models",     "k_S",           "k_sr_per_kS",   "N0",
      "delta_t_kS", "t_end_kS",      "step_kS",       "seed",
      "coherence_measure", "output_dir"};
  for (const auto &item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw ValidationError("unknown config field '" + item.key() + "'");
  try {
    if (j.contains("nuclei"))
      c.spins.nuclei = j.at("nuclei").get<std::vector<double>>();
    if (j.contains("omega1_per_kS"))
      c.omega1_per_ks = j.at("omega1_per_kS").get<double>();
    if (j.contains("omega2_per_kS"))
      c.omega2_per_ks = j.at("omega2_per_kS").get<double>();
    if (j.contains("hyperfine"))
      for (const auto &h : j.at("hyperfine"))
        c.hyperfine.push_back({h.at("electron").get<std::size_t>(),
                               h.at("nucleus").get<std::size_t>(),
                               h.at("A_per_kS").get<double>()});
    if (j.contains("models")) {
      c.models.clear();
      for (const auto &m : j.at("models"))
        c.models.push_back(parse_model_kind(m.get<std::string>()));
    }
    if (j.contains("k_S"))
      c.k_s = j.at("k_S").get<double>();
    if (j.contains("k_sr_per_kS"))
      c.k_sr_per_ks = j.at("k_sr_per_kS").get<double>();
    if (j.contains("N0"))
      c.n0 = j.at("N0").get<double>();
    if (j.contains("delta_t_kS"))
      c.delta_t_ks = j.at("delta_t_kS").get<double>();
    if (j.contains("t_end_kS"))
      c.t_end_ks = j.at("t_end_kS").get<double>();
    if (j.contains("step_kS") && !j.at("step_kS").is_null())
      c.step_ks = j.at("step_kS").get<double>();
    if (j.contains("seed"))
      c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("coherence_measure"))
      c.coherence =
          parse_coherence_measure(j.at("coherence_measure").get<std::string>());
    if (j.contains("output_dir"))
      c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

inline RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

/// FNV-1a 64 of the canonical JSON form (keys sorted, output_dir excluded).
inline std::string config_hash(const RunConfig &c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace radpair::pipeline
