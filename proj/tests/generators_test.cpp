#include <cmath>
#include <map>
#include <numeric>

#include <gtest/gtest.h>

#include "cdp/checks.hpp"
#include "cdp/distributions.hpp"
#include "cdp/enumerate.hpp"
#include "cdp/error.hpp"
#include "cdp/generators.hpp"

using namespace cdp;

namespace {

template <class Sampler>
bool matches_eppf(int n, int draws, const PartitionPriorModel& model, Sampler&& sample) {
  const auto parts = enumerate_partitions(n);
  std::map<Partition, std::size_t> index;
  for (std::size_t i = 0; i < parts.size(); ++i) index[parts[i]] = i;
  std::vector<double> observed(parts.size(), 0.0), probs;
  for (const auto& p : parts) probs.push_back(std::exp(log_eppf(model, p)));
  for (int k = 0; k < draws; ++k) observed[index.at(sample())] += 1.0;
  return chi_square_gof(observed, probs).passed;
}

}  // namespace

TEST(Primitives, Moments) {
  RngStream rng(1);
  const int draws = 100000;
  double dmean0 = 0.0, dmean1 = 0.0, bmean = 0.0, gsum = 0.0, gsq = 0.0;
  const std::vector<double> alpha{1.0, 1.0};
  for (int i = 0; i < draws; ++i) {
    const auto d = sample_dirichlet(alpha, rng);
    dmean0 += d[0];
    dmean1 += d[1];
    bmean += sample_beta(1.0, 3.0, rng);
    const double g = sample_gamma(2.0, 1.0, rng);
    gsum += g;
    gsq += g * g;
  }
  EXPECT_NEAR(dmean0 / draws, 0.5, 0.01);
  EXPECT_NEAR(dmean1 / draws, 0.5, 0.01);
  EXPECT_NEAR(bmean / draws, 0.25, 0.01);
  const double gm = gsum / draws;
  EXPECT_NEAR(gsq / draws - gm * gm, 2.0, 0.05);
}

TEST(Primitives, SmallShapeGammaStaysFinite) {
  RngStream rng(2);
  double mean = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double lg = sample_log_gamma(0.01, rng);
    ASSERT_TRUE(std::isfinite(lg));
    mean += std::exp(lg);
  }
  EXPECT_NEAR(mean / 20000, 0.01, 0.004);
}

TEST(Primitives, DomainErrors) {
  RngStream rng(3);
  EXPECT_THROW(sample_gamma(0.0, 1.0, rng), DomainError);
  EXPECT_THROW(sample_beta(1.0, -1.0, rng), DomainError);
  const std::vector<double> bad{1.0, 0.0};
  EXPECT_THROW(sample_dirichlet(bad, rng), DomainError);
}

TEST(Primitives, CategoricalFrequencies) {
  RngStream rng(4);
  const std::vector<double> w{1.0, 0.0, 3.0};
  std::vector<double> counts(3, 0.0);
  for (int i = 0; i < 40000; ++i) counts[sample_categorical(w, rng)] += 1.0;
  EXPECT_EQ(counts[1], 0.0);
  EXPECT_NEAR(counts[2] / 40000, 0.75, 0.01);
}

TEST(Rng, ReproducibleAndSplittable) {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
  EXPECT_NE(RngStream(42, 3)(), c());
  EXPECT_EQ(a.split(7)(), b.split(7)());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Gem, ResidualAndFirstWeight) {
  RngStream rng(5);
  const int runs = 100000;
  double residual = 0.0, w1 = 0.0;
  for (int i = 0; i < runs; ++i) {
    const auto s = sample_gem(1.0, FixedBreaks{10}, rng);
    ASSERT_EQ(s.weights.size(), 10u);
    residual += s.residual;
    w1 += sample_gem(4.0, FixedBreaks{1}, rng).weights[0];
  }
  EXPECT_NEAR(residual / runs, std::pow(0.5, 10), 2e-4);
  EXPECT_NEAR(w1 / runs, 0.2, 0.005);
}

TEST(Gem, WeightsTelescope) {
  RngStream rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto s = sample_gem(2.0, ResidualBelow{1e-8}, rng);
    EXPECT_LT(s.residual, 1e-8);
    EXPECT_NEAR(std::accumulate(s.weights.begin(), s.weights.end(), 0.0) + s.residual, 1.0, 1e-12);
    const auto t = sample_gem_two_param(0.5, 0.5, FixedBreaks{30}, rng);
    for (double w : t.weights) {
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 1.0);
    }
    EXPECT_NEAR(std::accumulate(t.weights.begin(), t.weights.end(), 0.0) + t.residual, 1.0, 1e-12);
  }
}

TEST(Gem, TwoParameterFirstWeight) {
  RngStream rng(7);
  double w1 = 0.0;
  std::vector<double> a, b;
  for (int i = 0; i < 100000; ++i) {
    w1 += sample_gem_two_param(0.5, 0.5, FixedBreaks{1}, rng).weights[0];
    a.push_back(sample_gem_two_param(0.0, 2.0, FixedBreaks{1}, rng).weights[0]);
    b.push_back(sample_gem(2.0, FixedBreaks{1}, rng).weights[0]);
  }
  EXPECT_NEAR(w1 / 100000, 1.0 / 3.0, 0.01);
  // two-sample Kolmogorov-Smirnov at the 1% level
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::abs(static_cast<double>(i) - static_cast<double>(j)) / 100000.0);
  }
  EXPECT_LT(d, 1.63 * std::sqrt(2.0 / 100000));
  EXPECT_THROW(sample_gem_two_param(1.0, 1.0, FixedBreaks{1}, rng), DomainError);
  EXPECT_THROW(sample_gem_two_param(0.5, -0.6, FixedBreaks{1}, rng), DomainError);
}

TEST(StickPartitions, PairAndLargeTheta) {
  RngStream rng(8);
  int together = 0, singles = 0;
  for (int i = 0; i < 100000; ++i) {
    together += sample_dp_partition_via_sticks(2, 1.0, rng).degree() == 1;
    singles += sample_dp_partition_via_sticks(4, 1000.0, rng).degree() == 4;
  }
  EXPECT_NEAR(together / 1e5, 0.5, 0.01);
  EXPECT_NEAR(singles / 1e5, 1000.0 / 1001 * 1000.0 / 1002 * 1000.0 / 1003, 0.01);
}

TEST(StickPartitions, MatchEppf) {
  RngStream rng(9);
  EXPECT_TRUE(matches_eppf(3, 50000, DirichletProcess{1.0}, [&] { return sample_dp_partition_via_sticks(3, 1.0, rng); }));
}

TEST(FiniteMixture, Examples) {
  RngStream rng(10);
  const auto one = sample_finite_mixture_alloc(1, 0.5, 6, rng);
  EXPECT_EQ(canonicalize(one).degree(), 1);
  int together = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto a = sample_finite_mixture_alloc(2, 1.0, 2, rng);
    together += a[0] == a[1];
  }
  // co-clustering probability (1 + delta) / (1 + k delta)
  EXPECT_NEAR(together / 1e5, 2.0 / 3.0, 0.01);
}

TEST(FiniteMixture, ApproachesDp) {
  RngStream rng(11);
  const auto parts = enumerate_partitions(3);
  std::map<Partition, double> freq;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) freq[canonicalize(sample_finite_mixture_alloc(1000, 0.001, 3, rng))] += 1.0 / draws;
  double tv = 0.0;
  for (const auto& p : parts) tv += std::abs(freq[p] - std::exp(log_eppf_dp(p, 1.0)));
  EXPECT_LT(tv / 2, 0.01);
}

TEST(PolyaSequence, Examples) {
  RngStream rng(12);
  GaussianBaseMeasure base({0.0}, {1.0});
  int same = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto d = sample_polya_sequence(2, 3.0, base, rng);
    same += d.atoms[0] == d.atoms[1];
  }
  EXPECT_NEAR(same / 1e5, 0.25, 0.01);
  EXPECT_TRUE(matches_eppf(4, 100000, DirichletProcess{0.7}, [&] {
    return canonicalize(sample_polya_sequence(4, 0.7, base, rng).allocation);
  }));
}

TEST(PolyaSequence, TiesDetectedById) {
  RngStream rng(13);
  struct ConstantBase : BaseMeasure {
    Atom draw(RngStream&) override { return {next_id(), {1.0}}; }
  } base;  // every atom has the same value
  const auto d = sample_polya_sequence(200, 50.0, base, rng);
  EXPECT_GT(canonicalize(d.allocation).degree(), 1);
  for (std::size_t i = 0; i < d.atoms.size(); ++i) {
    for (std::size_t j = 0; j < d.atoms.size(); ++j) {
      EXPECT_EQ(d.allocation[i] == d.allocation[j], d.atoms[i] == d.atoms[j]);
    }
  }
}

TEST(Cdp, SingleColourIsDpAndSymmetricColours) {
  RngStream rng(14);
  const auto parts = enumerate_partitions(3);
  std::map<Partition, double> freq;
  int colour0 = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    freq[sample_cdp(3, ColouredDP{{{1.0, 1.0}}}, rng).partition.partition()] += 1.0 / draws;
    colour0 += sample_cdp(1, ColouredDP{{{1.0, 2.0}, {1.0, 2.0}}}, rng).item_colours[0] == 0;
  }
  double tv = 0.0;
  for (const auto& p : parts) tv += std::abs(freq[p] - std::exp(log_eppf_dp(p, 1.0)));
  EXPECT_LT(tv / 2, 0.01);
  EXPECT_NEAR(colour0 / 1e5, 0.5, 0.01);
}

TEST(Cdp, ColouredFrequenciesMatchEppf) {
  RngStream rng(15);
  const ColouredDP params{{{1.0, 1.0}, {2.0, 0.5}}};
  const auto support = enumerate_coloured_partitions(3, 2);
  std::map<ColouredPartition, std::size_t> index;
  std::vector<double> probs, observed(support.size(), 0.0);
  for (std::size_t i = 0; i < support.size(); ++i) {
    index[support[i]] = i;
    probs.push_back(std::exp(log_eppf_cdp(support[i], params)));
  }
  for (int i = 0; i < 100000; ++i) observed[index.at(sample_cdp(3, params, rng).partition)] += 1.0;
  EXPECT_TRUE(chi_square_gof(observed, probs).passed);
}

TEST(Cdp, AtomsComeFromTheirColoursBase) {
  RngStream rng(16);
  GaussianBaseMeasure b0({-100.0}, {0.1}), b1({100.0}, {0.1});
  std::vector<BaseMeasure*> bases{&b0, &b1};
  const auto d = sample_cdp(50, ColouredDP{{{1.0, 1.0}, {1.0, 1.0}}}, bases, rng);
  ASSERT_EQ(d.atoms.size(), 50u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(d.atoms[static_cast<std::size_t>(i)].value[0] > 0, d.item_colours[static_cast<std::size_t>(i)] == 1);
}

TEST(Generators, SameSeedSameOutput) {
  RngStream a(77), b(77);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(sample_dp_partition_via_sticks(10, 1.5, a), sample_dp_partition_via_sticks(10, 1.5, b));
    EXPECT_EQ(sample_cdp(6, ColouredDP{{{1.0, 0.5}, {2.0, 1.5}}}, a).partition,
              sample_cdp(6, ColouredDP{{{1.0, 0.5}, {2.0, 1.5}}}, b).partition);
  }
}

TEST(DpMoments, EventMass) {
  RngStream rng(17);
  for (double theta : {1.0, 5.0}) {
    const double q = 0.3;
    double s = 0.0, sq = 0.0;
    const int reps = 100000;
    for (int i = 0; i < reps; ++i) {
      const double g = sample_dp_event_mass(theta, q, rng);
      s += g;
      sq += g * g;
    }
    const double mean = s / reps;
    EXPECT_NEAR(mean, q, 0.01);
    const double var = sq / reps - mean * mean;
    const double expected = q * (1 - q) / (1 + theta);
    EXPECT_NEAR(var / expected, 1.0, 0.1);
  }
}
