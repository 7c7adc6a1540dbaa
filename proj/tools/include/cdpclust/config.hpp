#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cdp/checks.hpp"
#include "cdp/estimation.hpp"
#include "cdp/gibbs.hpp"
#include "cdp/normal_gamma.hpp"
#include "cdp/partition_prior.hpp"

namespace cdpclust {

/// Hyperparameters of one conjugate prior as written in a config. Means and
/// precisions are stored expanded to full vectors and matrices once the
/// design dimensions are known.
struct PriorConfig {
  double a = 0.01;
  double b = 0.01;
  nlohmann::json m_delta = 0.0;
  nlohmann::json t_delta = 0.01;
  nlohmann::json m_beta = 0.0;
  nlohmann::json t_beta = 0.01;
  nlohmann::json delta0 = 0.0;
};

struct RunConfig {
  std::string preset;
  std::filesystem::path data;
  std::vector<std::string> annotation_columns;

  std::string family = "background";
  nlohmann::json model_params = nlohmann::json::object();

  PriorConfig prior;
  /// Overrides for the background cluster's prior; defaults to `prior`.
  std::optional<PriorConfig> background_prior;
  /// Per-colour priors for a coloured DP; defaults to `prior` for every colour.
  std::vector<PriorConfig> colour_priors;

  std::optional<std::filesystem::path> design_z;
  std::optional<std::filesystem::path> design_x;

  cdp::SweepPlan plan;
  int chains = 1;
  cdp::LossSpec loss;
  std::string strategy = "auto";  // exact, greedy or auto (exact up to 12 items)

  std::filesystem::path output = "cdpclust-out";
  std::uint64_t seed = 1;

  cdp::PartitionPriorModel prior_model() const;
  /// Conjugate priors, one per model colour, for a design with the given
  /// Z and X column counts.
  std::vector<cdp::NormalGammaSpec> likelihood_priors(int z_cols, int x_cols) const;
  /// Throws InvalidInput or DomainError on anything out of range.
  void validate() const;
};

/// The `wen-rat` preset: background model with theta = 1, gamma = 5,
/// a = b = 0.01, zero prior means, 0.01 I precisions, delta0 = 0,
/// 20000 sweeps of which 10000 are burn-in.
RunConfig wen_rat_preset();

/// Parses a config document. Relative paths resolve against `base_dir`.
/// A "preset" key seeds every default before the other keys apply.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Complete, resolved echo of a config; parse_run_config of it reproduces it.
nlohmann::json to_json(const RunConfig& cfg);

cdp::CheckConfig parse_check_config(const nlohmann::json& doc);
cdp::CheckConfig load_check_config(const std::filesystem::path& path);

/// The S = 9, K' = 5 piecewise-linear time design over embryonic days 11,
/// 13, 15, 18, 21, postnatal days 0, 7, 14 and adult.
Eigen::MatrixXd default_time_design();

/// Z from the config's CSV, or the default design when none is given and
/// samples == 9. X from its CSV or empty. Throws InvalidInput on mismatch.
cdp::DesignBlock build_design(const RunConfig& cfg, int samples);

}  // namespace cdpclust
