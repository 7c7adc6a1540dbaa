#include "cdp/partition.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "cdp/error.hpp"

namespace cdp {

namespace {

void append_cluster(std::ostringstream& os, const std::vector<int>& cluster) {
  os << '{';
  for (std::size_t k = 0; k < cluster.size(); ++k) {
    if (k) os << ',';
    os << cluster[k] + 1;
  }
  os << '}';
}

}  // namespace

Partition Partition::from_allocation(std::span<const int> labels) {
  if (labels.empty()) throw InvalidInput("allocation vector is empty");
  Partition p;
  p.labels_.resize(labels.size());
  std::unordered_map<int, int> relabel;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw InvalidInput("allocation label must be nonnegative");
    auto [it, inserted] = relabel.try_emplace(labels[i], static_cast<int>(p.clusters_.size()));
    if (inserted) p.clusters_.emplace_back();
    p.labels_[i] = it->second;
    p.clusters_[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(i));
  }
  return p;
}

Partition Partition::from_clusters(const std::vector<std::vector<int>>& clusters, int n) {
  if (n <= 0) throw InvalidInput("partition needs at least one item");
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    if (clusters[j].empty()) throw InvalidInput("partition has an empty cluster");
    for (int item : clusters[j]) {
      if (item < 0 || item >= n) throw InvalidInput("cluster item out of range");
      if (labels[static_cast<std::size_t>(item)] != -1) throw InvalidInput("clusters overlap");
      labels[static_cast<std::size_t>(item)] = static_cast<int>(j);
    }
  }
  if (std::find(labels.begin(), labels.end(), -1) != labels.end()) {
    throw InvalidInput("clusters do not cover every item");
  }
  return from_allocation(labels);
}

Partition Partition::singletons(int n) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::iota(labels.begin(), labels.end(), 0);
  return from_allocation(labels);
}

Partition Partition::one_cluster(int n) {
  return from_allocation(std::vector<int>(static_cast<std::size_t>(n), 0));
}

std::vector<int> Partition::cluster_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(clusters_.size());
  for (const auto& c : clusters_) sizes.push_back(static_cast<int>(c.size()));
  return sizes;
}

Partition Partition::permuted(std::span<const int> perm) const {
  if (perm.size() != labels_.size()) throw InvalidInput("permutation length mismatch");
  std::vector<int> labels(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) labels[static_cast<std::size_t>(perm[i])] = labels_[i];
  return from_allocation(labels);
}

std::string Partition::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t j = 0; j < clusters_.size(); ++j) {
    if (j) os << ',';
    append_cluster(os, clusters_[j]);
  }
  os << '}';
  return os.str();
}

Partition canonicalize(std::span<const int> labels) { return Partition::from_allocation(labels); }

int ColouredCounts::total() const {
  int n = 0;
  for (const auto& s : sizes) n += std::accumulate(s.begin(), s.end(), 0);
  return n;
}

int ColouredCounts::colour_total(int k) const {
  const auto& s = sizes[static_cast<std::size_t>(k)];
  return std::accumulate(s.begin(), s.end(), 0);
}

int ColouredCounts::degree() const {
  int d = 0;
  for (const auto& s : sizes) d += static_cast<int>(s.size());
  return d;
}

ColouredCounts ColouredCounts::uncoloured(std::vector<int> cluster_sizes) {
  ColouredCounts c;
  c.sizes.push_back(std::move(cluster_sizes));
  return c;
}

ColouredPartition::ColouredPartition(Partition p, std::vector<int> cluster_colours, int num_colours)
    : partition_(std::move(p)), colours_(std::move(cluster_colours)), num_colours_(num_colours) {
  if (num_colours_ < 1) throw InvalidInput("need at least one colour");
  if (static_cast<int>(colours_.size()) != partition_.degree()) {
    throw InvalidInput("one colour per cluster required");
  }
  for (int k : colours_) {
    if (k < 0 || k >= num_colours_) throw InvalidInput("cluster colour out of range");
  }
}

ColouredPartition ColouredPartition::from_items(std::span<const int> labels, std::span<const int> item_colours,
                                                int num_colours) {
  if (labels.size() != item_colours.size()) throw InvalidInput("labels and colours differ in length");
  Partition p = Partition::from_allocation(labels);
  std::vector<int> colours(static_cast<std::size_t>(p.degree()), -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int& c = colours[static_cast<std::size_t>(p.label_of(static_cast<int>(i)))];
    if (c == -1) {
      c = item_colours[i];
    } else if (c != item_colours[i]) {
      throw InvalidInput("items of one cluster carry different colours");
    }
  }
  return ColouredPartition(std::move(p), std::move(colours), num_colours);
}

ColouredPartition ColouredPartition::monochrome(Partition p, int num_colours) {
  std::vector<int> colours(static_cast<std::size_t>(p.degree()), 0);
  return ColouredPartition(std::move(p), std::move(colours), num_colours);
}

int ColouredPartition::degree(int colour) const {
  return static_cast<int>(std::count(colours_.begin(), colours_.end(), colour));
}

std::vector<std::vector<int>> ColouredPartition::clusters_of_colour(int colour) const {
  std::vector<std::vector<int>> out;
  for (std::size_t j = 0; j < colours_.size(); ++j) {
    if (colours_[j] == colour) out.push_back(partition_.clusters()[j]);
  }
  return out;
}

ColouredCounts ColouredPartition::counts() const {
  ColouredCounts c;
  c.sizes.resize(static_cast<std::size_t>(num_colours_));
  for (std::size_t j = 0; j < colours_.size(); ++j) {
    c.sizes[static_cast<std::size_t>(colours_[j])].push_back(
        static_cast<int>(partition_.clusters()[j].size()));
  }
  return c;
}

ColouredPartition ColouredPartition::permuted(std::span<const int> perm) const {
  std::vector<int> labels(static_cast<std::size_t>(size()));
  std::vector<int> item_colours(static_cast<std::size_t>(size()));
  for (int i = 0; i < size(); ++i) {
    labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = partition_.label_of(i);
    item_colours[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = colour_of_item(i);
  }
  return from_items(labels, item_colours, num_colours_);
}

std::string ColouredPartition::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t j = 0; j < colours_.size(); ++j) {
    if (j) os << ',';
    append_cluster(os, partition_.clusters()[j]);
    os << ':' << colours_[j];
  }
  os << '}';
  return os.str();
}

void ConfigurationCounts::validate() const {
  long long total = 0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r] < 0) throw InvalidInput("configuration count must be nonnegative");
    total += static_cast<long long>(r + 1) * a[r];
  }
  if (n < 1 || total != n) throw InvalidInput("configuration counts do not sum to n");
}

ConfigurationCounts configuration_of(const Partition& p) {
  ConfigurationCounts c;
  c.n = p.size();
  c.a.assign(static_cast<std::size_t>(p.size()), 0);
  for (int s : p.cluster_sizes()) ++c.a[static_cast<std::size_t>(s - 1)];
  return c;
}

}  // namespace cdp
