// Command-line front end: simulate, sample, compare, skellam, ingest-check.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "radpair/pipeline/commands.hpp"

namespace rp = radpair::pipeline;

namespace {

rp::RunConfig resolve_config(const std::string &path,
                             const std::optional<std::uint64_t> &seed,
                             const std::string &models) {
  rp::RunConfig config = path.empty() ? rp::RunConfig{} : rp::load_config(path);
  if (seed)
    config.seed = *seed;
  if (!models.empty())
    config.models = rp::parse_model_list(models);
  rp::validate(config);
  return config;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Radical-pair recombination simulator and photon-count statistics"};
  app.require_subcommand(1);

  std::string config_path, out_dir, models;
  std::optional<std::uint64_t> seed;
  std::size_t trials = 0;

  auto *simulate = app.add_subcommand("simulate", "integrate master equations and write expected counts");
  auto *sample = app.add_subcommand("sample", "Poisson-sample photon counts from the expectations");
  for (auto *sub : {simulate, sample}) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", seed, "64-bit RNG seed (overrides config)");
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--models", models, "comma list of jh,kominis,haberkorn");
  }
  sample->add_option("--trials", trials, "number of sampled experiments")->required();

  std::string predicted, observed, report_path;
  std::uint64_t trial = 0;
  auto *compare = app.add_subcommand("compare", "score models against an observed count trace");
  compare->add_option("--predicted", predicted, "bins.csv from simulate")->required();
  compare->add_option("--observed", observed, "counts CSV (t_bin,n or trial,t_bin,n)")->required();
  compare->add_option("--trial", trial, "trial to use from a multi-trial counts file");
  compare->add_option("--report", report_path, "write JSON report to this path");
  compare->add_flag("--json", "print the JSON report instead of text");

  long long k = 0;
  double n1 = 0.0, n2 = 0.0;
  auto *skellam = app.add_subcommand("skellam", "evaluate the Skellam pmf f(k; N1, N2)");
  skellam->add_option("k", k)->required();
  skellam->add_option("N1", n1)->required();
  skellam->add_option("N2", n2)->required();

  std::string ingest_path;
  auto *ingest = app.add_subcommand("ingest-check", "validate a counts CSV");
  ingest->add_option("path", ingest_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(radpair::ExitCode::validation);
  }

  try {
    if (*simulate || *sample) {
      const rp::RunConfig config = resolve_config(config_path, seed, models);
      const std::filesystem::path dir = out_dir.empty() ? config.output_dir : out_dir;
      if (*simulate) {
        const auto out = rp::cmd_simulate(config, dir);
        std::cout << "wrote " << out.bins.string() << ", " << out.deltan.string()
                  << " and " << out.trajectories.size() << " trajectories\n";
      } else {
        const auto out = rp::cmd_sample(config, trials, dir);
        std::cout << "wrote " << out.counts.size() << " count files (" << trials
                  << " trials, seed " << config.seed << ") to " << dir.string()
                  << '\n';
      }
    } else if (*compare) {
      const auto report = rp::cmd_compare(predicted, observed, trial, report_path);
      if (compare->count("--json"))
        std::cout << rp::to_json(report).dump(2) << '\n';
      else
        std::cout << rp::to_text(report);
    } else if (*skellam) {
      std::cout << rp::cmd_skellam(k, n1, n2) << '\n';
    } else if (*ingest) {
      const auto trials_read = rp::ingest_count_trials(ingest_path);
      std::size_t rows = 0;
      for (const auto &s : trials_read)
        rows += s.size();
      std::cout << ingest_path << ": " << trials_read.size() << " trial(s), "
                << rows << " bins, ok\n";
    }
  } catch (const radpair::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(radpair::ExitCode::io);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(radpair::ExitCode::numerical);
  }
  return 0;
}
