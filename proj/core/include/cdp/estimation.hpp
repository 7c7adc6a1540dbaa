#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdp/partition.hpp"

namespace cdp {

/// Posterior pairwise co-clustering probabilities rho(i,j), with rho(i,i) = 1.
struct SimilarityMatrix {
  Eigen::MatrixXd rho;
  std::uint64_t sample_count = 0;

  int size() const { return static_cast<int>(rho.rows()); }
};

/// Integer co-occurrence counts over sampled partitions. Merging two
/// accumulators is exact, associative and commutative.
class SimilarityAccumulator {
 public:
  explicit SimilarityAccumulator(int n);

  void add(const Partition& p);
  void merge(const SimilarityAccumulator& other);

  int size() const { return n_; }
  std::uint64_t sample_count() const { return samples_; }
  std::uint64_t together_count(int i, int j) const;

  /// Throws InvalidInput when no sample has been added.
  SimilarityMatrix matrix() const;

  friend bool operator==(const SimilarityAccumulator&, const SimilarityAccumulator&) = default;

 private:
  int n_;
  std::uint64_t samples_ = 0;
  std::vector<std::uint64_t> together_;  // strict upper triangle, row-major
};

/// Throws InvalidInput on an empty trace or mismatched sizes.
SimilarityMatrix accumulate_similarity(std::span<const Partition> trace);

struct LossSpec {
  double weight_false_positive = 1.0;
  double weight_false_negative = 1.0;

  /// Throws DomainError unless both weights are >= 0 and not both zero.
  void validate() const;
};

/// sum_{i<j} [w_fp 1(together) (1 - rho_ij) + w_fn 1(apart) rho_ij]
double expected_pairwise_loss(const Partition& p, const SimilarityMatrix& s, const LossSpec& loss);

enum class SearchStrategy { exact, greedy };

/// Partition minimizing the expected pairwise loss.
///
/// `exact` walks every partition (n <= 12, else TooLarge) with a bound on
/// the remaining items and returns the canonically smallest minimizer.
/// `greedy` merges clusters from all singletons, always taking the largest
/// loss decrease, then relocates single items until nothing improves, and
/// finally keeps the one-cluster partition instead if that scores lower.
Partition optimal_partition(const SimilarityMatrix& s, const LossSpec& loss, SearchStrategy strategy);

/// Per-coordinate mean of a cluster's profiles with a normal-approximation
/// 95% interval mean +/- 1.96 sd / sqrt(e) (sample sd). Singletons get a
/// zero-width interval.
struct ClusterSummary {
  std::vector<int> items;
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// One summary per cluster in canonical order; `data` has one row per item.
std::vector<ClusterSummary> cluster_summaries(const Partition& p, const Eigen::MatrixXd& data);

/// counts[j][c] = number of items of cluster j whose annotation is
/// categories[c]. Categories are sorted.
struct Crosstab {
  std::vector<std::string> categories;
  std::vector<std::vector<int>> counts;
};

Crosstab crosstab(const Partition& p, std::span<const std::string> annotation);

}  // namespace cdp
