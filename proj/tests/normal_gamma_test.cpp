#include <cmath>
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>

#include "cdp/error.hpp"
#include "cdp/normal_gamma.hpp"
#include "test_support.hpp"

using namespace cdp;
using testing_support::random_background;
using testing_support::random_design;
using testing_support::random_regular;
using testing_support::random_vector;

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& data, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), data.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = data.row(idx[r]);
  return out;
}

DesignBlock scalar_design() { return DesignBlock::z_only(Eigen::MatrixXd::Ones(1, 1)); }

NormalGammaSpec scalar_prior(double a, double b, double m, double t) {
  return NormalGammaSpec::regular(a, b, Eigen::VectorXd::Constant(1, m), Eigen::MatrixXd::Constant(1, 1, t),
                                  Eigen::VectorXd(0), Eigen::MatrixXd(0, 0));
}

}  // namespace

TEST(LogMvt, CauchyAtZero) {
  EXPECT_NEAR(log_mvt(Eigen::VectorXd::Zero(1), 1.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)),
              -std::log(std::numbers::pi), 1e-12);
  EXPECT_NEAR(-std::log(std::numbers::pi), -1.1447, 1e-4);
}

TEST(LogMvt, SymmetricAboutMean) {
  cdp::RngStream rng(1);
  const Eigen::VectorXd mu = random_vector(3, rng), v = random_vector(3, rng);
  const Eigen::MatrixXd sigma = testing_support::random_spd(3, rng);
  EXPECT_NEAR(log_mvt(mu + v, 4.5, mu, sigma), log_mvt(mu - v, 4.5, mu, sigma), 1e-13);
}

TEST(LogMvt, IntegratesToOne) {
  const double h = 1e-3;
  double s = 0.0;
  for (double x = -50.0; x <= 50.0 + 1e-9; x += h) {
    const double w = (std::abs(x + 50.0) < 1e-9 || std::abs(x - 50.0) < 1e-9) ? 0.5 : 1.0;
    s += w * std::exp(log_mvt(Eigen::VectorXd::Constant(1, x), 3.0, Eigen::VectorXd::Zero(1),
                              Eigen::MatrixXd::Identity(1, 1)));
  }
  // t_3 has a closed-form cdf; the tails beyond 50 hold about 1.8e-5
  const double u = 50.0 / std::sqrt(3.0);
  const double inside = 2.0 / std::numbers::pi * (u / (1.0 + u * u) + std::atan(u));
  EXPECT_NEAR(s * h, inside, 1e-6);
}

TEST(LogMvt, LargeDofApproachesNormal) {
  cdp::RngStream rng(2);
  const Eigen::VectorXd x = random_vector(2, rng), mu = random_vector(2, rng);
  const Eigen::MatrixXd sigma = testing_support::random_spd(2, rng);
  const Eigen::VectorXd d = x - mu;
  const double gauss = -std::log(2 * std::numbers::pi) - 0.5 * std::log(sigma.determinant()) -
                       0.5 * d.dot(sigma.inverse() * d);
  EXPECT_NEAR(log_mvt(x, 1e6, mu, sigma), gauss, 1e-4);
}

TEST(Posterior, EmptyClusterKeepsPrior) {
  cdp::RngStream rng(3);
  const DesignBlock d = random_design(4, 2, 1, rng);
  const NormalGammaSpec p = random_regular(d, rng);
  const NormalGammaSpec q = posterior_update(p, ClusterStats(4), d);
  EXPECT_EQ(q.a, p.a);
  EXPECT_EQ(q.b, p.b);
  EXPECT_TRUE(q.m.isApprox(p.m));
  EXPECT_TRUE(q.t.isApprox(p.t));
  EXPECT_EQ(ConjugateMarginal(p, d).log_marginal(ClusterStats(4)), 0.0);
}

TEST(Posterior, ScalarUpdate) {
  const double y = 1.7, m0 = -0.4, t0 = 2.5;
  const auto q = posterior_update(scalar_prior(2.0, 3.0, m0, t0), ClusterStats::of_item(Eigen::VectorXd::Constant(1, y)),
                                  scalar_design());
  EXPECT_NEAR(q.m(0), (y + t0 * m0) / (1 + t0), 1e-14);
  EXPECT_NEAR(q.t(0, 0), 1 + t0, 1e-14);
  EXPECT_NEAR(q.a, 2.5, 1e-14);
  EXPECT_NEAR(q.b, 3.0 + 0.5 * t0 / (1 + t0) * (y - m0) * (y - m0), 1e-14);
}

TEST(Posterior, OrderInvariant) {
  cdp::RngStream rng(4);
  const DesignBlock d = random_design(3, 2, 1, rng);
  const NormalGammaSpec p = random_regular(d, rng);
  const Eigen::VectorXd y1 = random_vector(3, rng), y2 = random_vector(3, rng);
  ClusterStats s12(3), s21(3);
  s12.add(y1);
  s12.add(y2);
  s21.add(y2);
  s21.add(y1);
  const auto a = posterior_update(p, s12, d), b = posterior_update(p, s21, d);
  EXPECT_NEAR(a.a, b.a, 1e-12);
  EXPECT_NEAR(a.b, b.b, 1e-12);
  EXPECT_LT((a.m - b.m).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a.t - b.t).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Marginal, SingleScalarObservationIsT) {
  const NormalGammaSpec p = scalar_prior(1.0, 1.0, 0.0, 1.0);
  const ClusterStats s = ClusterStats::of_item(Eigen::VectorXd::Zero(1));
  const double expected = log_mvt(Eigen::VectorXd::Zero(1), 2.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 2.0));
  EXPECT_NEAR(log_marginal_regular(s, scalar_design(), p), expected, 1e-13);
  EXPECT_NEAR(ConjugateMarginal(p, scalar_design()).log_marginal(s), expected, 1e-13);
}

TEST(Marginal, MatchesStackedT) {
  cdp::RngStream rng(5);
  for (int inst = 0; inst < 30; ++inst) {
    const DesignBlock d = random_design(3, 2, inst % 3, rng);
    const Eigen::MatrixXd data = testing_support::random_matrix(3, 3, rng);
    const NormalGammaSpec reg = random_regular(d, rng), bg = random_background(d, rng);
    const ConjugateMarginal cr(reg, d), cb(bg, d);
    for (int e = 1; e <= 3; ++e) {
      std::vector<int> idx(static_cast<std::size_t>(e));
      std::iota(idx.begin(), idx.end(), 0);
      const ClusterStats s = ClusterStats::of_rows(data, idx);
      EXPECT_NEAR(cr.log_marginal(s), log_marginal_stacked(rows_of(data, idx), d, reg), 1e-8);
      EXPECT_NEAR(log_marginal_regular(s, d, reg), log_marginal_stacked(rows_of(data, idx), d, reg), 1e-8);
      EXPECT_NEAR(cb.log_marginal(s), log_marginal_stacked(rows_of(data, idx), d, bg), 1e-8);
      EXPECT_NEAR(log_marginal_background(s, d, bg), log_marginal_stacked(rows_of(data, idx), d, bg), 1e-8);
    }
  }
}

TEST(Marginal, ChainRuleTelescoping) {
  cdp::RngStream rng(6);
  for (int inst = 0; inst < 20; ++inst) {
    const DesignBlock d = random_design(4, 2, 1, rng);
    const Eigen::MatrixXd data = testing_support::random_matrix(5, 4, rng);
    for (const auto& spec : {random_regular(d, rng), random_background(d, rng)}) {
      const ConjugateMarginal cm(spec, d);
      const double full = cm.log_marginal(ClusterStats::of_rows(data, {0, 1, 2, 3, 4}));
      std::vector<int> order{0, 1, 2, 3, 4};
      for (int rep = 0; rep < 5; ++rep) {
        for (int i = 4; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[rng.uniform_index(i + 1)]);
        ClusterStats acc(4);
        double sum = 0.0;
        for (int i : order) {
          const ClusterStats item = ClusterStats::of_item(data.row(i).transpose());
          sum += cm.log_predictive(item, acc);
          EXPECT_NEAR(log_predictive(item, acc, d, spec), cm.log_predictive(item, acc), 1e-9);
          acc.merge(item);
        }
        EXPECT_NEAR(sum, full, 1e-8);
      }
    }
  }
}

TEST(Marginal, BackgroundZeroOffsetNoCovariatesIsSpherical) {
  cdp::RngStream rng(7);
  const DesignBlock d = random_design(3, 2, 0, rng);
  const NormalGammaSpec bg = NormalGammaSpec::background_cluster(1.5, 0.7, Eigen::VectorXd(0), Eigen::MatrixXd(0, 0),
                                                                 Eigen::VectorXd::Zero(2));
  const Eigen::MatrixXd data = testing_support::random_matrix(2, 3, rng);
  Eigen::VectorXd stacked(6);
  stacked << data.row(0).transpose(), data.row(1).transpose();
  const double expected =
      log_mvt(stacked, 3.0, Eigen::VectorXd::Zero(6), (0.7 / 1.5) * Eigen::MatrixXd::Identity(6, 6));
  EXPECT_NEAR(log_marginal_background(ClusterStats::of_rows(data, {0, 1}), d, bg), expected, 1e-12);
}

TEST(Marginal, BackgroundOffsetIsALocationShift) {
  cdp::RngStream rng(8);
  const DesignBlock d = random_design(3, 2, 1, rng);
  const NormalGammaSpec shifted = random_background(d, rng);
  NormalGammaSpec centred = shifted;
  centred.fixed_delta = Eigen::VectorXd::Zero(2);
  const Eigen::MatrixXd data = testing_support::random_matrix(3, 3, rng);
  Eigen::MatrixXd moved = data;
  moved.rowwise() += (d.z * *shifted.fixed_delta).transpose();
  EXPECT_NEAR(log_marginal_background(ClusterStats::of_rows(moved, {0, 1, 2}), d, shifted),
              log_marginal_background(ClusterStats::of_rows(data, {0, 1, 2}), d, centred), 1e-11);
}

TEST(Marginal, ZeroCovariateBlockMatchesNoCovariates) {
  cdp::RngStream rng(9);
  const DesignBlock with_x{testing_support::random_matrix(4, 2, rng), Eigen::MatrixXd::Zero(4, 2)};
  const DesignBlock without_x = DesignBlock::z_only(with_x.z);
  const Eigen::VectorXd md = random_vector(2, rng);
  const Eigen::MatrixXd td = testing_support::random_spd(2, rng);
  const auto full = NormalGammaSpec::regular(2.0, 1.0, md, td, random_vector(2, rng), testing_support::random_spd(2, rng));
  const auto bare = NormalGammaSpec::regular(2.0, 1.0, md, td, Eigen::VectorXd(0), Eigen::MatrixXd(0, 0));
  const Eigen::MatrixXd data = testing_support::random_matrix(3, 4, rng);
  const ClusterStats s = ClusterStats::of_rows(data, {0, 1, 2});
  EXPECT_NEAR(ConjugateMarginal(full, with_x).log_marginal(s), ConjugateMarginal(bare, without_x).log_marginal(s), 1e-12);
}

TEST(Predictive, EmptyClusterIsSingleItemMarginal) {
  cdp::RngStream rng(10);
  const DesignBlock d = random_design(3, 2, 1, rng);
  const ConjugateMarginal cm(random_regular(d, rng), d);
  const ClusterStats item = ClusterStats::of_item(random_vector(3, rng));
  EXPECT_NEAR(cm.log_predictive(item, ClusterStats(3)), cm.log_marginal(item), 1e-13);
}

TEST(Predictive, BorrowsStrength) {
  cdp::RngStream rng(3);
  const DesignBlock d = random_design(4, 2, 0, rng);
  const ConjugateMarginal cm(random_regular(d, rng), d);
  const ClusterStats item = ClusterStats::of_item(random_vector(4, rng, 3.0));
  EXPECT_GT(cm.log_predictive(item, item), cm.log_predictive(item, ClusterStats(4)));
}

TEST(Predictive, IntegratesToOne) {
  const ConjugateMarginal cm(scalar_prior(1.5, 0.8, 0.3, 0.5), scalar_design());
  const ClusterStats one = ClusterStats::of_item(Eigen::VectorXd::Constant(1, 1.2));
  for (const ClusterStats& cluster : {ClusterStats(1), one}) {
    const double h = 2e-3;
    double s = 0.0;
    for (double y = -300.0; y <= 300.0; y += h) s += std::exp(cm.log_predictive(ClusterStats::of_item(Eigen::VectorXd::Constant(1, y)), cluster));
    EXPECT_NEAR(s * h, 1.0, 1e-4);
  }
}

TEST(Stats, DowndateRestoresMarginal) {
  cdp::RngStream rng(11);
  const DesignBlock d = random_design(3, 1, 1, rng);
  const ConjugateMarginal cm(random_regular(d, rng), d);
  const Eigen::MatrixXd data = testing_support::random_matrix(4, 3, rng);
  ClusterStats s = ClusterStats::of_rows(data, {0, 1, 2});
  const double before = cm.log_marginal(s);
  s.add(data.row(3).transpose());
  s.remove(data.row(3).transpose());
  EXPECT_NEAR(cm.log_marginal(s), before, 1e-10);
}

TEST(Spec, DomainErrors) {
  const DesignBlock d = scalar_design();
  EXPECT_THROW(ConjugateMarginal(scalar_prior(0.0, 1.0, 0.0, 1.0), d), DomainError);
  EXPECT_THROW(ConjugateMarginal(scalar_prior(1.0, -1.0, 0.0, 1.0), d), DomainError);
  EXPECT_THROW(ConjugateMarginal(scalar_prior(1.0, 1.0, 0.0, -2.0), d), DomainError);
  const auto wrong = NormalGammaSpec::regular(1.0, 1.0, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2),
                                              Eigen::VectorXd(0), Eigen::MatrixXd(0, 0));
  EXPECT_THROW(ConjugateMarginal(wrong, d), InvalidInput);
}
