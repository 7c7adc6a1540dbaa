#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cdp/checks.hpp"
#include "cdp/error.hpp"
#include "cdpclust/config.hpp"
#include "cdpclust/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kNumerical = 2, kCheckFailed = 3 };

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, std::optional<int> chains,
            const std::string& out) {
  cdpclust::RunConfig cfg = cdpclust::load_config_or_manifest(config);
  if (seed) cfg.seed = *seed;
  if (chains) cfg.chains = *chains;
  if (!out.empty()) cfg.output = out;
  const auto r = cdpclust::run_pipeline(cfg);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "wrote " << r.files.size() << " files to " << r.output.string() << " (" << r.degree
            << " clusters)\n";
  return kOk;
}

int cmd_summarize(const std::string& run_dir, const std::string& out) {
  const auto r = cdpclust::summarize_run(run_dir, out);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "wrote " << r.files.size() << " files to " << r.output.string() << " (" << r.degree
            << " clusters)\n";
  return kOk;
}

int cmd_verify(const std::string& config, std::optional<std::uint64_t> seed) {
  cdp::CheckConfig cfg = config.empty() ? cdp::CheckConfig{} : cdpclust::load_check_config(config);
  if (seed) cfg.seed = *seed;
  bool all = true;
  for (int c = 1; c <= cdp::kNumOracleChecks; ++c) {
    const cdp::CheckResult r = cdp::run_check(c, cfg);
    std::cout << cdp::format_result(r) << std::endl;
    all = all && r.passed;
  }
  return all ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coloured Dirichlet process clustering"};
  app.require_subcommand(1);

  std::string config, out, run_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;

  auto* run = app.add_subcommand("run", "Sample the posterior and write all result tables");
  run->add_option("--config", config, "Run config or an earlier manifest.json (JSON)")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--chains", chains, "Number of concurrent chains")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Output directory");

  auto* verify = app.add_subcommand("verify", "Run the small-n oracle checks");
  verify->add_option("--config", config, "Check config (JSON)");
  verify->add_option("--seed", seed, "Override the check seed");

  auto* summarize = app.add_subcommand("summarize", "Recompute estimates from an existing run directory");
  summarize->add_option("run", run_dir, "Directory holding trace.csv and manifest.json")->required();
  summarize->add_option("--out", out, "Output directory (defaults to the run directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(config, seed, chains, out);
    if (*verify) return cmd_verify(config, seed);
    return cmd_summarize(run_dir, out);
  } catch (const cdp::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const cdp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}
