#include <cmath>
#include <limits>
#include <numeric>

#include <gtest/gtest.h>

#include "cdp/enumerate.hpp"
#include "cdp/error.hpp"
#include "cdp/estimation.hpp"
#include "cdp/generators.hpp"
#include "cdp/rng.hpp"

using namespace cdp;

namespace {

SimilarityMatrix matrix_of(const Eigen::MatrixXd& rho) { return {rho, 1}; }

SimilarityMatrix three_item_example() {
  Eigen::MatrixXd rho(3, 3);
  rho << 1.0, 0.9, 0.1, 0.9, 1.0, 0.1, 0.1, 0.1, 1.0;
  return matrix_of(rho);
}

SimilarityMatrix random_similarity(int n, RngStream& rng) {
  SimilarityAccumulator acc(n);
  const double theta = 0.5 + 2.0 * rng.uniform();
  const int samples = 5 + static_cast<int>(rng.uniform_index(40));
  for (int s = 0; s < samples; ++s) acc.add(sample_dp_partition_via_sticks(n, theta, rng));
  return acc.matrix();
}

Partition brute_force_best(const SimilarityMatrix& s, const LossSpec& loss) {
  Partition best;
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& p : enumerate_partitions(s.size())) {
    const double l = expected_pairwise_loss(p, s, loss);
    if (l < lo - 1e-12) {
      lo = l;
      best = p;
    }
  }
  return best;
}

}  // namespace

TEST(Similarity, Examples) {
  SimilarityAccumulator one(3);
  one.add(canonicalize(std::vector<int>{0, 0, 1}));
  const auto m = one.matrix();
  EXPECT_EQ(m.rho(0, 1), 1.0);
  EXPECT_EQ(m.rho(0, 2), 0.0);
  EXPECT_EQ(m.rho(2, 2), 1.0);

  const std::vector<Partition> trace{Partition::one_cluster(2), Partition::singletons(2)};
  EXPECT_EQ(accumulate_similarity(trace).rho(0, 1), 0.5);
  EXPECT_THROW(accumulate_similarity(std::vector<Partition>{}), InvalidInput);
  EXPECT_THROW(SimilarityAccumulator(2).matrix(), InvalidInput);
  SimilarityAccumulator acc(2);
  EXPECT_THROW(acc.add(Partition::singletons(3)), InvalidInput);
}

TEST(Similarity, MergeIsExact) {
  RngStream rng(1);
  std::vector<Partition> trace;
  for (int i = 0; i < 300; ++i) trace.push_back(sample_dp_partition_via_sticks(7, 1.0, rng));
  SimilarityAccumulator a(7), b(7), c(7), all(7);
  for (int i = 0; i < 300; ++i) {
    (i < 100 ? a : i < 220 ? b : c).add(trace[static_cast<std::size_t>(i)]);
    all.add(trace[static_cast<std::size_t>(i)]);
  }
  SimilarityAccumulator left = a, right = b;
  left.merge(b);
  left.merge(c);
  right.merge(c);
  SimilarityAccumulator assoc = a;
  assoc.merge(right);
  EXPECT_EQ(left, all);
  EXPECT_EQ(assoc, all);
  SimilarityAccumulator swapped = c;
  swapped.merge(a);
  swapped.merge(b);
  EXPECT_EQ(swapped, all);
  EXPECT_TRUE(left.matrix().rho == accumulate_similarity(trace).rho);
}

TEST(Loss, Examples) {
  const Partition p = canonicalize(std::vector<int>{0, 1, 0, 2});
  Eigen::MatrixXd exact = Eigen::MatrixXd::Identity(4, 4);
  exact(0, 2) = exact(2, 0) = 1.0;
  EXPECT_EQ(expected_pairwise_loss(p, matrix_of(exact), {}), 0.0);

  RngStream rng(2);
  const auto s = random_similarity(6, rng);
  double sum = 0.0;
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) sum += s.rho(i, j);
  }
  EXPECT_NEAR(expected_pairwise_loss(Partition::singletons(6), s, {1.0, 2.5}), 2.5 * sum, 1e-12);

  const auto ex = three_item_example();
  const Partition target = canonicalize(std::vector<int>{0, 0, 1});
  EXPECT_NEAR(expected_pairwise_loss(target, ex, {}), 0.3, 1e-12);
  for (const auto& q : enumerate_partitions(3)) EXPECT_GE(expected_pairwise_loss(q, ex, {}), 0.3 - 1e-12);
}

TEST(Loss, RelabelingInvariance) {
  RngStream rng(3);
  const auto s = random_similarity(6, rng);
  const std::vector<int> perm{3, 0, 5, 1, 4, 2};
  SimilarityMatrix t = s;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) t.rho(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) = s.rho(i, j);
  }
  for (const auto& p : enumerate_partitions(6)) {
    EXPECT_NEAR(expected_pairwise_loss(p.permuted(perm), t, {1.0, 0.7}), expected_pairwise_loss(p, s, {1.0, 0.7}), 1e-12);
  }
}

TEST(Optimal, Examples) {
  for (auto strategy : {SearchStrategy::exact, SearchStrategy::greedy}) {
    EXPECT_EQ(optimal_partition(three_item_example(), {}, strategy), canonicalize(std::vector<int>{0, 0, 1}));
    const Partition blocks = canonicalize(std::vector<int>{0, 1, 0, 2, 1, 2, 2});
    Eigen::MatrixXd rho(7, 7);
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 7; ++j) rho(i, j) = blocks.together(i, j) ? 1.0 : 0.0;
    }
    EXPECT_EQ(optimal_partition(matrix_of(rho), {}, strategy), blocks);
    EXPECT_EQ(optimal_partition(matrix_of(Eigen::MatrixXd::Identity(5, 5)), {}, strategy), Partition::singletons(5));
  }
}

TEST(Optimal, ExactMatchesBruteForceAndBeatsGreedy) {
  RngStream rng(4);
  for (int inst = 0; inst < 40; ++inst) {
    const int n = 3 + inst % 6;
    const auto s = random_similarity(n, rng);
    const LossSpec loss{0.5 + rng.uniform(), 0.5 + rng.uniform()};
    const Partition exact = optimal_partition(s, loss, SearchStrategy::exact);
    const Partition greedy = optimal_partition(s, loss, SearchStrategy::greedy);
    EXPECT_EQ(exact, brute_force_best(s, loss));
    EXPECT_LE(expected_pairwise_loss(exact, s, loss), expected_pairwise_loss(greedy, s, loss) + 1e-12);
    EXPECT_LE(expected_pairwise_loss(greedy, s, loss),
              std::min(expected_pairwise_loss(Partition::singletons(n), s, loss),
                       expected_pairwise_loss(Partition::one_cluster(n), s, loss)) + 1e-12);
  }
}

TEST(Optimal, ScalingWeightsKeepsArgmin) {
  RngStream rng(5);
  for (int inst = 0; inst < 10; ++inst) {
    const auto s = random_similarity(7, rng);
    const Partition a = optimal_partition(s, {1.0, 2.0}, SearchStrategy::exact);
    EXPECT_EQ(optimal_partition(s, {3.5, 7.0}, SearchStrategy::exact), a);
    EXPECT_EQ(optimal_partition(s, {0.01, 0.02}, SearchStrategy::exact), a);
  }
}

TEST(Optimal, Errors) {
  EXPECT_THROW(optimal_partition(matrix_of(Eigen::MatrixXd::Identity(13, 13)), {}, SearchStrategy::exact), TooLarge);
  EXPECT_THROW(optimal_partition(three_item_example(), {0.0, 0.0}, SearchStrategy::greedy), DomainError);
  EXPECT_THROW(optimal_partition(three_item_example(), {-1.0, 1.0}, SearchStrategy::greedy), DomainError);
  EXPECT_EQ(optimal_partition(matrix_of(Eigen::MatrixXd::Identity(40, 40)), {}, SearchStrategy::greedy).degree(), 40);
}

TEST(Summaries, Examples) {
  Eigen::MatrixXd data(4, 2);
  data << 0.0, 5.0, 2.0, 5.0, 7.0, -1.0, 3.0, 3.0;
  const Partition p = canonicalize(std::vector<int>{0, 0, 1, 2});
  const auto s = cluster_summaries(p, data);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(s[0].mean(0), 1.0, 1e-15);
  EXPECT_NEAR(s[0].upper(0) - s[0].mean(0), 1.96, 1e-12);
  EXPECT_NEAR(s[0].lower(1), 5.0, 1e-15);
  EXPECT_NEAR(s[0].upper(1), 5.0, 1e-15);
  EXPECT_EQ(s[1].mean(0), 7.0);
  EXPECT_EQ(s[1].lower(1), s[1].upper(1));
  EXPECT_THROW(cluster_summaries(Partition::singletons(3), data), InvalidInput);
}

TEST(Crosstab, CountsPerCluster) {
  const Partition p = canonicalize(std::vector<int>{0, 0, 1, 1, 1});
  const std::vector<std::string> ann{"b", "a", "b", "b", "c"};
  const auto t = crosstab(p, ann);
  EXPECT_EQ(t.categories, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(t.counts[0], (std::vector<int>{1, 1, 0}));
  EXPECT_EQ(t.counts[1], (std::vector<int>{0, 2, 1}));
  const std::vector<std::string> one(5, "x");
  const auto u = crosstab(p, one);
  ASSERT_EQ(u.categories.size(), 1u);
  EXPECT_EQ(u.counts[0][0], 2);
  EXPECT_EQ(u.counts[1][0], 3);
}
