#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cdp {

/// A set partition of the items {0, ..., n-1}.
///
/// Always held in canonical form: clusters are sorted internally and ordered
/// by their smallest element, so the allocation labels form a restricted
/// growth string (item 0 has label 0, each new label is one past the largest
/// seen so far). Two partitions compare equal iff they group items the same
/// way, whatever labels they were built from. Ordering is lexicographic on the
/// canonical labels and is the tie-break order used throughout.
class Partition {
 public:
  Partition() = default;

  /// Groups items by arbitrary nonnegative labels. Throws InvalidInput on an
  /// empty vector or a negative label.
  static Partition from_allocation(std::span<const int> labels);

  /// Validates that `clusters` are disjoint, nonempty and cover {0..n-1}.
  static Partition from_clusters(const std::vector<std::vector<int>>& clusters, int n);

  static Partition singletons(int n);
  static Partition one_cluster(int n);

  int size() const { return static_cast<int>(labels_.size()); }
  int degree() const { return static_cast<int>(clusters_.size()); }

  const std::vector<std::vector<int>>& clusters() const { return clusters_; }
  const std::vector<int>& labels() const { return labels_; }
  int label_of(int item) const { return labels_[static_cast<std::size_t>(item)]; }
  bool together(int i, int j) const { return label_of(i) == label_of(j); }

  std::vector<int> cluster_sizes() const;

  /// Applies an item relabeling: item i of *this becomes item perm[i].
  Partition permuted(std::span<const int> perm) const;

  /// e.g. "{{1,2},{3}}" with 1-based items.
  std::string to_string() const;

  friend bool operator==(const Partition& a, const Partition& b) { return a.labels_ == b.labels_; }
  friend std::strong_ordering operator<=>(const Partition& a, const Partition& b) {
    return a.labels_ <=> b.labels_;
  }

 private:
  std::vector<int> labels_;
  std::vector<std::vector<int>> clusters_;
};

/// Canonicalizes an allocation vector; same as Partition::from_allocation.
Partition canonicalize(std::span<const int> labels);

/// Cluster sizes grouped by colour: sizes[k][j] = n_kj. Uncoloured models use
/// a single colour.
struct ColouredCounts {
  std::vector<std::vector<int>> sizes;

  int num_colours() const { return static_cast<int>(sizes.size()); }
  int total() const;
  int colour_total(int k) const;
  int degree(int k) const { return static_cast<int>(sizes[static_cast<std::size_t>(k)].size()); }
  int degree() const;

  static ColouredCounts uncoloured(std::vector<int> cluster_sizes);
};

/// A partition whose clusters each carry a colour in [0, num_colours).
/// Clusters are exchangeable only within a colour; the colour labels
/// themselves are fixed. Empty colours are allowed.
class ColouredPartition {
 public:
  ColouredPartition() = default;

  /// `cluster_colours[j]` is the colour of the j-th canonical cluster of `p`.
  ColouredPartition(Partition p, std::vector<int> cluster_colours, int num_colours);

  /// Builds from per-item cluster labels and per-item colours. Items sharing a
  /// label must share a colour.
  static ColouredPartition from_items(std::span<const int> labels, std::span<const int> item_colours,
                                      int num_colours);

  /// Every cluster gets colour 0 of a single-colour partition.
  static ColouredPartition monochrome(Partition p, int num_colours = 1);

  int size() const { return partition_.size(); }
  int num_colours() const { return num_colours_; }
  int degree() const { return partition_.degree(); }
  int degree(int colour) const;

  const Partition& partition() const { return partition_; }
  const std::vector<int>& cluster_colours() const { return colours_; }
  int colour_of_item(int item) const { return colours_[static_cast<std::size_t>(partition_.label_of(item))]; }

  /// Clusters of one colour, in smallest-element order.
  std::vector<std::vector<int>> clusters_of_colour(int colour) const;

  ColouredCounts counts() const;

  ColouredPartition permuted(std::span<const int> perm) const;

  std::string to_string() const;

  friend bool operator==(const ColouredPartition& a, const ColouredPartition& b) {
    return a.num_colours_ == b.num_colours_ && a.partition_ == b.partition_ && a.colours_ == b.colours_;
  }
  friend std::strong_ordering operator<=>(const ColouredPartition& a, const ColouredPartition& b) {
    if (auto c = a.partition_ <=> b.partition_; c != 0) return c;
    if (auto c = a.colours_ <=> b.colours_; c != 0) return c;
    return a.num_colours_ <=> b.num_colours_;
  }

 private:
  Partition partition_;
  std::vector<int> colours_;
  int num_colours_ = 1;
};

/// a[r-1] = number of clusters of size r.
struct ConfigurationCounts {
  int n = 0;
  std::vector<int> a;

  /// Throws InvalidInput unless every a_r >= 0 and sum r*a_r == n.
  void validate() const;
};

ConfigurationCounts configuration_of(const Partition& p);

}  // namespace cdp
