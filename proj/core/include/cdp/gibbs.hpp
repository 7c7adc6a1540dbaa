#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cdp/normal_gamma.hpp"
#include "cdp/partition.hpp"
#include "cdp/partition_prior.hpp"
#include "cdp/rng.hpp"

namespace cdp {

/// Everything a chain needs besides its current state: the partition prior,
/// the data (items x samples) and one conjugate likelihood per colour. With
/// no likelihoods the chain samples the prior alone ("flat" likelihood).
class ChainModel {
 public:
  /// `likelihoods` holds one entry per model colour, or a single entry shared
  /// by every colour, or nothing for a flat likelihood. Throws InvalidInput on
  /// dimension mismatches.
  ChainModel(PartitionPriorModel prior, Eigen::MatrixXd data, std::vector<ConjugateMarginal> likelihoods);

  /// Prior-only model over n items.
  static ChainModel flat(PartitionPriorModel prior, int n);

  const PartitionPriorModel& prior() const { return prior_; }
  const Eigen::MatrixXd& data() const { return data_; }
  int size() const { return static_cast<int>(data_.rows()); }
  int samples() const { return static_cast<int>(data_.cols()); }
  int num_colours() const { return prior_.num_colours(); }
  bool flat_likelihood() const { return likelihoods_.empty(); }

  double log_marginal(int colour, const ClusterStats& stats) const;
  ClusterStats stats_of(std::span<const int> items) const;

  /// log EPPF plus the sum of cluster log marginals.
  double log_posterior(const ColouredPartition& p) const;

  /// Colour that fresh single-item clusters start in: the regular colour
  /// under the background model, colour 0 otherwise.
  int default_colour() const;

 private:
  PartitionPriorModel prior_;
  Eigen::MatrixXd data_;
  std::vector<ConjugateMarginal> likelihoods_;
};

/// Current coloured partition of a chain with cached per-cluster statistics
/// and log marginals. Clusters live in slots that are deleted eagerly when
/// they empty; slot order carries no meaning and is canonicalized on export.
class ChainState {
 public:
  struct Cluster {
    int colour = 0;
    std::vector<int> items;
    ClusterStats stats;
    double log_marginal = 0.0;
  };

  ChainState(std::shared_ptr<const ChainModel> model, const ColouredPartition& initial, RngStream rng);

  /// All items in singleton clusters of model->default_colour().
  static ChainState singletons(std::shared_ptr<const ChainModel> model, RngStream rng);

  const ChainModel& model() const { return *model_; }
  std::shared_ptr<const ChainModel> model_ptr() const { return model_; }
  int size() const { return static_cast<int>(slot_of_item_.size()); }
  int degree() const { return static_cast<int>(clusters_.size()); }
  const std::vector<Cluster>& clusters() const { return clusters_; }
  int slot_of(int item) const { return slot_of_item_[static_cast<std::size_t>(item)]; }

  ColouredPartition partition() const;
  ColouredCounts counts() const;

  double log_prior() const;
  /// Sum of cached cluster log marginals.
  double log_likelihood() const;
  double log_posterior() const { return log_prior() + log_likelihood(); }

  /// Recomputes every cluster's statistics and marginal from scratch and
  /// throws NumericalFailure if a cached value differs by more than `tol`.
  void check_coherence(double tol = 1e-8) const;

  RngStream& rng() { return rng_; }

  /// Removes `items` (all from one slot) and returns their statistics. The
  /// slot is deleted if it empties.
  ClusterStats withdraw(std::span<const int> items);
  /// Inserts into an existing slot, or into a new slot of `colour` when `slot`
  /// equals degree().
  void insert(std::span<const int> items, const ClusterStats& stats, int slot, int colour);

 private:
  std::shared_ptr<const ChainModel> model_;
  std::vector<Cluster> clusters_;
  std::vector<int> slot_of_item_;
  RngStream rng_;
};

/// One destination for a withdrawn block: an existing slot, or a new cluster
/// of a given colour (slot == -1).
struct MoveOption {
  int slot = -1;
  int colour = 0;
  double log_weight = 0.0;
};

/// Unnormalized log weights of every destination for `block`, which must
/// already be withdrawn from `state`. Prior part from the reallocation
/// weights (single item) or from EPPF ratios (larger blocks); likelihood part
/// from the block's predictive density.
std::vector<MoveOption> move_options(const ChainState& state, std::span<const int> block, const ClusterStats& stats);

/// Single-item Gibbs step: withdraw item i and reinsert it from its full
/// conditional. Returns the chosen option's normalized log probability.
double reallocate_item(ChainState& state, int item);

/// Moves the whole of `block` (a nonempty subset of one current cluster) from
/// its block conditional. Throws InvalidInput if it straddles clusters.
double reallocate_subset(ChainState& state, std::span<const int> block);

/// Exact distribution over the coloured partitions reachable by one move, as
/// (partition, probability) pairs with duplicates merged. Leaves `state`
/// untouched.
std::vector<std::pair<ColouredPartition, double>> item_kernel(const ChainState& state, int item);
std::vector<std::pair<ColouredPartition, double>> subset_kernel(const ChainState& state, std::span<const int> block);

#ifdef NDEBUG
inline constexpr int kDefaultCoherenceInterval = 0;
#else
inline constexpr int kDefaultCoherenceInterval = 100;
#endif

struct SweepPlan {
  int sweeps = 1;
  int burn_in = 0;
  int thin = 1;
  /// Probability of one random subset move after each full item pass.
  double subset_move_rate = 0.0;
  int subset_cap = 8;
  std::uint64_t seed = 0;
  /// Cache coherence is checked every this many sweeps; 0 disables it.
  int coherence_check_interval = kDefaultCoherenceInterval;

  /// Throws InvalidInput unless 0 <= burn_in < sweeps, thin >= 1 and the rate lies in [0, 1].
  void validate() const;
};

struct TraceRecord {
  int sweep = 0;
  ColouredPartition partition;
  int degree = 0;
  std::vector<int> colour_degrees;
  double log_posterior = 0.0;
};

/// One full systematic pass over items 0..n-1, then, with probability
/// plan.subset_move_rate, one Metropolis-corrected random subset move.
void sweep(ChainState& state, const SweepPlan& plan);

/// The random subset move on its own. A uniformly chosen cluster of size m
/// supplies a uniformly chosen nonempty subset of at most `cap` items, which
/// is moved by reallocate_subset and accepted with probability
/// min(1, q(reverse) / q(forward)). Returns true if the state changed.
bool random_subset_move(ChainState& state, int cap);

/// Runs a chain from all singletons. Sweep indices are 1-based; sweep s is
/// kept when s > burn_in and (s - burn_in) % thin == 0.
std::vector<TraceRecord> run_chain(std::shared_ptr<const ChainModel> model, const SweepPlan& plan,
                                   std::uint64_t stream = 0);

std::vector<TraceRecord> run_chain(const Eigen::MatrixXd& data, const DesignBlock& design,
                                   const PartitionPriorModel& prior, const std::vector<NormalGammaSpec>& likelihood,
                                   const SweepPlan& plan);

}  // namespace cdp
