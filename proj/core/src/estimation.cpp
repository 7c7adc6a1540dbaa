#include "cdp/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "cdp/enumerate.hpp"
#include "cdp/error.hpp"

namespace cdp {

namespace {

constexpr double kTieTolerance = 1e-12;

std::size_t pair_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  // rows 0..i-1 hold n-1, n-2, ... entries
  const auto ii = static_cast<std::size_t>(i);
  return ii * static_cast<std::size_t>(n) - ii * (ii + 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

/// gain(i,j) = cost if together minus cost if apart.
Eigen::MatrixXd pair_gains(const SimilarityMatrix& s, const LossSpec& loss) {
  return (loss.weight_false_positive * (1.0 - s.rho.array()) - loss.weight_false_negative * s.rho.array()).matrix();
}

void check_matrix(const SimilarityMatrix& s) {
  if (s.rho.rows() != s.rho.cols()) throw InvalidInput("similarity matrix must be square");
  if (s.rho.rows() < 1) throw InvalidInput("similarity matrix is empty");
}

Partition exact_search(const SimilarityMatrix& s, const LossSpec& loss) {
  const int n = s.size();
  if (n > kMaxEnumerationItems) throw TooLarge("exact partition search is limited to 12 items");
  const Eigen::MatrixXd g = pair_gains(s, loss);

  // bound[i]: most negative total any items >= i could still add
  std::vector<double> bound(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double b = 0.0;
    for (int j = 0; j < i; ++j) b += std::min(0.0, g(i, j));
    bound[static_cast<std::size_t>(i)] = bound[static_cast<std::size_t>(i) + 1] + b;
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(n));
  std::vector<int> best_labels(static_cast<std::size_t>(n), 0);
  double best = std::numeric_limits<double>::infinity();

  auto dfs = [&](auto&& self, int i, int degree, double cost) -> void {
    if (cost + bound[static_cast<std::size_t>(i)] > best + kTieTolerance) return;
    if (i == n) {
      if (cost < best - kTieTolerance) {
        best = cost;
        best_labels = labels;
      }
      return;
    }
    for (int c = 0; c <= degree && c < n; ++c) {
      double add = 0.0;
      for (int j : members[static_cast<std::size_t>(c)]) add += g(i, j);
      labels[static_cast<std::size_t>(i)] = c;
      members[static_cast<std::size_t>(c)].push_back(i);
      self(self, i + 1, std::max(degree, c + 1), cost + add);
      members[static_cast<std::size_t>(c)].pop_back();
    }
  };
  labels[0] = 0;
  members[0].push_back(0);
  dfs(dfs, 1, 1, 0.0);
  return Partition::from_allocation(best_labels);
}

Partition greedy_search(const SimilarityMatrix& s, const LossSpec& loss) {
  const int n = s.size();
  const Eigen::MatrixXd g = pair_gains(s, loss);

  // agglomeration over cluster-pair gain sums
  std::vector<std::vector<int>> clusters(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) clusters[static_cast<std::size_t>(i)] = {i};
  Eigen::MatrixXd between = g;
  between.diagonal().setZero();
  while (clusters.size() > 1) {
    double best = -kTieTolerance;
    int ba = -1, bb = -1;
    for (int a = 0; a < static_cast<int>(clusters.size()); ++a) {
      for (int b = a + 1; b < static_cast<int>(clusters.size()); ++b) {
        if (between(a, b) < best) {
          best = between(a, b);
          ba = a;
          bb = b;
        }
      }
    }
    if (ba < 0) break;
    auto& target = clusters[static_cast<std::size_t>(ba)];
    auto& source = clusters[static_cast<std::size_t>(bb)];
    target.insert(target.end(), source.begin(), source.end());
    std::sort(target.begin(), target.end());
    const Eigen::Index last = static_cast<Eigen::Index>(clusters.size()) - 1;
    between.row(ba) += between.row(bb);
    between.col(ba) += between.col(bb);
    between(ba, ba) = 0.0;
    // move the last cluster into the freed slot bb
    if (bb != last) {
      clusters[static_cast<std::size_t>(bb)] = std::move(clusters.back());
      between.row(bb) = between.row(last);
      between.col(bb) = between.col(last);
      between(bb, bb) = 0.0;
    }
    clusters.pop_back();
    between.conservativeResize(last, last);
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (int i : clusters[c]) labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
  }

  // relocation passes; labels may leave holes, which canonicalization removes
  int next_label = static_cast<int>(clusters.size());
  bool moved = true;
  while (moved) {
    moved = false;
    for (int i = 0; i < n; ++i) {
      std::map<int, double> join;
      for (int j = 0; j < n; ++j) {
        if (j != i) join[labels[static_cast<std::size_t>(j)]] += g(i, j);
      }
      const int own = labels[static_cast<std::size_t>(i)];
      const double current = join.count(own) ? join[own] : 0.0;
      double best = current;
      int target = own;
      for (const auto& [label, cost] : join) {
        if (cost < best - kTieTolerance) {
          best = cost;
          target = label;
        }
      }
      if (0.0 < best - kTieTolerance && join.count(own)) {
        best = 0.0;
        target = next_label++;
      }
      if (target != own) {
        labels[static_cast<std::size_t>(i)] = target;
        moved = true;
      }
    }
  }
  Partition out = Partition::from_allocation(labels);

  const Partition one = Partition::one_cluster(n);
  const double lo = expected_pairwise_loss(out, s, loss);
  const double lone = expected_pairwise_loss(one, s, loss);
  if (lone < lo - kTieTolerance || (std::abs(lone - lo) <= kTieTolerance && one < out)) return one;
  return out;
}

}  // namespace

SimilarityAccumulator::SimilarityAccumulator(int n) : n_(n) {
  if (n < 1) throw InvalidInput("similarity needs at least one item");
  together_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2, 0);
}

void SimilarityAccumulator::add(const Partition& p) {
  if (p.size() != n_) throw InvalidInput("sampled partitions differ in item count");
  for (const auto& c : p.clusters()) {
    for (std::size_t a = 0; a < c.size(); ++a) {
      for (std::size_t b = a + 1; b < c.size(); ++b) ++together_[pair_index(n_, c[a], c[b])];
    }
  }
  ++samples_;
}

void SimilarityAccumulator::merge(const SimilarityAccumulator& other) {
  if (other.n_ != n_) throw InvalidInput("cannot merge accumulators of different sizes");
  for (std::size_t k = 0; k < together_.size(); ++k) together_[k] += other.together_[k];
  samples_ += other.samples_;
}

std::uint64_t SimilarityAccumulator::together_count(int i, int j) const {
  if (i == j) return samples_;
  return together_[pair_index(n_, i, j)];
}

SimilarityMatrix SimilarityAccumulator::matrix() const {
  if (samples_ == 0) throw InvalidInput("no sampled partitions to accumulate");
  SimilarityMatrix s;
  s.sample_count = samples_;
  s.rho = Eigen::MatrixXd::Identity(n_, n_);
  const auto denom = static_cast<double>(samples_);
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      const double v = static_cast<double>(together_[pair_index(n_, i, j)]) / denom;
      s.rho(i, j) = v;
      s.rho(j, i) = v;
    }
  }
  return s;
}

SimilarityMatrix accumulate_similarity(std::span<const Partition> trace) {
  if (trace.empty()) throw InvalidInput("trace is empty");
  SimilarityAccumulator acc(trace.front().size());
  for (const auto& p : trace) acc.add(p);
  return acc.matrix();
}

void LossSpec::validate() const {
  if (!(weight_false_positive >= 0.0) || !(weight_false_negative >= 0.0)) {
    throw DomainError("loss weights must be nonnegative");
  }
  if (weight_false_positive == 0.0 && weight_false_negative == 0.0) {
    throw DomainError("loss weights cannot both be zero");
  }
}

double expected_pairwise_loss(const Partition& p, const SimilarityMatrix& s, const LossSpec& loss) {
  check_matrix(s);
  if (p.size() != s.size()) throw InvalidInput("partition and similarity matrix differ in size");
  double total = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    for (int j = i + 1; j < p.size(); ++j) {
      total += p.together(i, j) ? loss.weight_false_positive * (1.0 - s.rho(i, j))
                                : loss.weight_false_negative * s.rho(i, j);
    }
  }
  return total;
}

Partition optimal_partition(const SimilarityMatrix& s, const LossSpec& loss, SearchStrategy strategy) {
  check_matrix(s);
  loss.validate();
  if (s.size() == 1) return Partition::singletons(1);
  return strategy == SearchStrategy::exact ? exact_search(s, loss) : greedy_search(s, loss);
}

std::vector<ClusterSummary> cluster_summaries(const Partition& p, const Eigen::MatrixXd& data) {
  if (data.rows() != p.size()) throw InvalidInput("data rows must match the partition size");
  std::vector<ClusterSummary> out;
  for (const auto& c : p.clusters()) {
    ClusterSummary cs;
    cs.items = c;
    const auto e = static_cast<double>(c.size());
    cs.mean = Eigen::VectorXd::Zero(data.cols());
    for (int i : c) cs.mean += data.row(i).transpose();
    cs.mean /= e;
    Eigen::VectorXd half = Eigen::VectorXd::Zero(data.cols());
    if (c.size() > 1) {
      Eigen::VectorXd ss = Eigen::VectorXd::Zero(data.cols());
      for (int i : c) ss += (data.row(i).transpose() - cs.mean).array().square().matrix();
      half = 1.96 * (ss / (e - 1.0)).array().sqrt().matrix() / std::sqrt(e);
    }
    cs.lower = cs.mean - half;
    cs.upper = cs.mean + half;
    out.push_back(std::move(cs));
  }
  return out;
}

Crosstab crosstab(const Partition& p, std::span<const std::string> annotation) {
  if (static_cast<int>(annotation.size()) != p.size()) throw InvalidInput("one annotation per item required");
  Crosstab t;
  t.categories.assign(annotation.begin(), annotation.end());
  std::sort(t.categories.begin(), t.categories.end());
  t.categories.erase(std::unique(t.categories.begin(), t.categories.end()), t.categories.end());
  t.counts.assign(static_cast<std::size_t>(p.degree()), std::vector<int>(t.categories.size(), 0));
  for (int i = 0; i < p.size(); ++i) {
    const auto c = std::lower_bound(t.categories.begin(), t.categories.end(), annotation[static_cast<std::size_t>(i)]) -
                   t.categories.begin();
    ++t.counts[static_cast<std::size_t>(p.label_of(i))][static_cast<std::size_t>(c)];
  }
  return t;
}

}  // namespace cdp
