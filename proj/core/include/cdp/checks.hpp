#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdp/gibbs.hpp"

namespace cdp {

/// Exact posterior over every coloured partition with nonzero probability,
/// by enumeration (n <= 12 uncoloured; coloured sizes are capped as well).
std::vector<std::pair<ColouredPartition, double>> enumerate_posterior(const ChainModel& model);

/// Pushes a distribution through one systematic sweep of single-item kernels.
std::vector<std::pair<ColouredPartition, double>> apply_sweep_kernel(
    std::shared_ptr<const ChainModel> model, const std::vector<std::pair<ColouredPartition, double>>& dist);

/// Largest absolute difference between two distributions over partitions.
double max_abs_difference(const std::vector<std::pair<ColouredPartition, double>>& a,
                          const std::vector<std::pair<ColouredPartition, double>>& b);

/// Pearson goodness-of-fit of observed counts against exact probabilities.
/// Cells whose expected count falls below `min_expected` are pooled into one
/// cell before the statistic is formed.
struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double critical = 0.0;  // upper `level` quantile
  bool passed = false;
};

ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> probabilities,
                               double level = 0.99, double min_expected = 5.0);

/// Knobs for the small-n oracle suite run by `verify` and the acceptance test.
struct CheckConfig {
  std::uint64_t seed = 20240611;
  std::vector<double> dp_thetas{0.3, 1.0, 5.0};
  /// Added to every DP log EPPF inside the normalization check. Anything
  /// other than 0 must make that check fail.
  double eppf_log_offset = 0.0;
  int construction_samples = 100000;
  int finite_mixture_components = 2000;
  int moment_replicates = 100000;
  int marginal_instances = 100;
  int chain_sweeps = 200000;
  int chain_thin = 10;
  int loss_instances = 50;
};

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Criteria 1..8 of the oracle suite. Model-domain errors in the config
/// propagate as exceptions.
CheckResult check_eppf_normalization(const CheckConfig& cfg);
CheckResult check_ewens_agreement(const CheckConfig& cfg);
CheckResult check_construction_equivalence(const CheckConfig& cfg);
CheckResult check_dp_moments(const CheckConfig& cfg);
CheckResult check_conjugate_chain_rule(const CheckConfig& cfg);
CheckResult check_gibbs_invariance(const CheckConfig& cfg);
CheckResult check_gibbs_convergence(const CheckConfig& cfg);
CheckResult check_loss_optimizer(const CheckConfig& cfg);

inline constexpr int kNumOracleChecks = 8;

/// Runs one criterion by number (1..8).
CheckResult run_check(int criterion, const CheckConfig& cfg);

/// "PASS [3] construction equivalence (1.2 s): detail"
std::string format_result(const CheckResult& r);

}  // namespace cdp
