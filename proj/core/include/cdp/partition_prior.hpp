#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cdp/partition.hpp"

namespace cdp {

struct DirichletProcess {
  double theta = 1.0;
};

/// Symmetric Dirichlet-multinomial finite mixture with `components` slots.
struct DirichletMultinomial {
  int components = 1;
  double delta = 1.0;
};

/// Two-parameter Poisson-Dirichlet: discount in [0,1), strength > -discount.
struct PitmanYor {
  double discount = 0.0;
  double strength = 1.0;
};

struct ColourParams {
  double gamma = 1.0;
  double theta = 1.0;
};

/// Coloured DP with one (gamma_k, theta_k) pair per colour.
struct ColouredDP {
  std::vector<ColourParams> colours;
};

/// Background-cluster special case: colour 0 holds at most one "background"
/// cluster with weight gamma, colour 1 holds ordinary DP(theta) clusters.
struct BackgroundDP {
  double gamma = 1.0;
  double theta = 1.0;
};

/// Tagged union over the partition prior families. Construction validates the
/// parameter domain and throws DomainError.
class PartitionPriorModel {
 public:
  using Variant = std::variant<DirichletProcess, DirichletMultinomial, PitmanYor, ColouredDP, BackgroundDP>;

  PartitionPriorModel(DirichletProcess m);
  PartitionPriorModel(DirichletMultinomial m);
  PartitionPriorModel(PitmanYor m);
  PartitionPriorModel(ColouredDP m);
  PartitionPriorModel(BackgroundDP m);

  const Variant& get() const { return model_; }

  /// 1 for the uncoloured families, K for a coloured DP, 2 for background.
  int num_colours() const;
  bool coloured() const { return num_colours() > 1 || std::holds_alternative<ColouredDP>(model_); }
  std::string name() const;

 private:
  Variant model_;
};

inline constexpr int kBackgroundColour = 0;
inline constexpr int kRegularColour = 1;

/// Closed form exp(.) = Gamma(theta)/Gamma(theta+n) theta^d prod (n_j - 1)!.
double log_eppf_dp(const Partition& p, double theta);

/// Ewens sampling formula for the configuration (a_1, a_2, ...).
double log_ewens_config(const ConfigurationCounts& a, double theta);

double log_eppf_cdp(const ColouredPartition& p, const ColouredDP& params);

/// Colour 0 is the background. Returns kLogZero if it holds two or more clusters.
double log_eppf_background(const ColouredPartition& p, double gamma, double theta);

/// Closed-form log EPPF from cluster sizes, dispatched on the model family.
/// Uncoloured families accept any number of colours as long as only colour 0
/// is occupied.
double log_eppf(const PartitionPriorModel& model, const ColouredCounts& counts);
double log_eppf(const PartitionPriorModel& model, const Partition& p);
double log_eppf(const PartitionPriorModel& model, const ColouredPartition& p);

/// Log EPPF defined as the product of one-step predictive probabilities,
/// adding items in index order and normalizing the reallocation weights at
/// every step.
double log_eppf_sequential(const PartitionPriorModel& model, const Partition& p);
double log_eppf_sequential(const PartitionPriorModel& model, const ColouredPartition& p);

/// Unnormalized log weights for placing one further item, given the cluster
/// sizes of the other items. existing[k][j] lines up with counts.sizes[k][j];
/// fresh[k] is the weight of opening a new colour-k cluster. Impossible
/// options carry kLogZero.
struct ReallocWeights {
  std::vector<std::vector<double>> existing;
  std::vector<double> fresh;
};

ReallocWeights prior_realloc_weights(const PartitionPriorModel& model, const ColouredCounts& counts);

}  // namespace cdp
