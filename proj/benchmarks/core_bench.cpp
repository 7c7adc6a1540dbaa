#include <memory>

#include <benchmark/benchmark.h>

#include "cdp/estimation.hpp"
#include "cdp/generators.hpp"
#include "cdp/gibbs.hpp"
#include "cdp/partition_prior.hpp"

namespace {

cdp::DesignBlock time_design() {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(9, 5);
  const double days[] = {11, 13, 15, 18, 21, 0, 7, 14};
  for (int s = 0; s < 5; ++s) z.row(s) << 1, days[s], 0, 0, 0;
  for (int s = 5; s < 8; ++s) z.row(s) << 0, 0, 1, days[s], 0;
  z(8, 4) = 1;
  return cdp::DesignBlock::z_only(z);
}

Eigen::MatrixXd wave_data(int n) {
  cdp::RngStream rng(1);
  Eigen::MatrixXd y(n, 9);
  for (int i = 0; i < n; ++i) {
    const double phase = (i % 5) * 0.8;
    for (int s = 0; s < 9; ++s) y(i, s) = std::sin(s * 0.5 + phase) + 0.1 * rng.normal();
  }
  return y;
}

std::shared_ptr<const cdp::ChainModel> background_model(int n) {
  const cdp::DesignBlock d = time_design();
  std::vector<cdp::ConjugateMarginal> m;
  m.emplace_back(cdp::NormalGammaSpec::background_cluster(0.01, 0.01, Eigen::VectorXd(0), Eigen::MatrixXd(0, 0),
                                                          Eigen::VectorXd::Zero(5)),
                 d);
  m.emplace_back(cdp::NormalGammaSpec::regular(0.01, 0.01, Eigen::VectorXd::Zero(5),
                                               0.01 * Eigen::MatrixXd::Identity(5, 5), Eigen::VectorXd(0),
                                               Eigen::MatrixXd(0, 0)),
                 d);
  return std::make_shared<const cdp::ChainModel>(cdp::BackgroundDP{5.0, 1.0}, wave_data(n), std::move(m));
}

void BM_LogEppfDp(benchmark::State& state) {
  cdp::RngStream rng(2);
  const cdp::Partition p = cdp::sample_dp_partition_via_sticks(static_cast<int>(state.range(0)), 2.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(cdp::log_eppf_dp(p, 2.0));
}
BENCHMARK(BM_LogEppfDp)->Arg(16)->Arg(256);

void BM_LogEppfSequentialPitmanYor(benchmark::State& state) {
  cdp::RngStream rng(3);
  const cdp::Partition p = cdp::sample_dp_partition_via_sticks(static_cast<int>(state.range(0)), 2.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(cdp::log_eppf_sequential(cdp::PitmanYor{0.3, 1.0}, p));
}
BENCHMARK(BM_LogEppfSequentialPitmanYor)->Arg(16)->Arg(256);

void BM_LogMarginal(benchmark::State& state) {
  const auto model = background_model(64);
  std::vector<int> items(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < items.size(); ++i) items[i] = static_cast<int>(i);
  const cdp::ClusterStats stats = model->stats_of(items);
  for (auto _ : state) benchmark::DoNotOptimize(model->log_marginal(cdp::kRegularColour, stats));
}
BENCHMARK(BM_LogMarginal)->Arg(1)->Arg(32);

void BM_StackedMarginal(benchmark::State& state) {
  const auto model = background_model(8);
  const int e = static_cast<int>(state.range(0));
  const auto spec = cdp::NormalGammaSpec::regular(1.0, 1.0, Eigen::VectorXd::Zero(5), Eigen::MatrixXd::Identity(5, 5),
                                                  Eigen::VectorXd(0), Eigen::MatrixXd(0, 0));
  const Eigen::MatrixXd rows = model->data().topRows(e);
  for (auto _ : state) benchmark::DoNotOptimize(cdp::log_marginal_stacked(rows, time_design(), spec));
}
BENCHMARK(BM_StackedMarginal)->Arg(1)->Arg(4);

void BM_Sweep(benchmark::State& state) {
  const auto model = background_model(static_cast<int>(state.range(0)));
  cdp::ChainState chain = cdp::ChainState::singletons(model, cdp::RngStream(4));
  cdp::SweepPlan plan;
  plan.coherence_check_interval = 0;
  for (int s = 0; s < 50; ++s) cdp::sweep(chain, plan);
  for (auto _ : state) cdp::sweep(chain, plan);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sweep)->Arg(112)->Unit(benchmark::kMicrosecond);

void BM_GreedyPartition(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  cdp::RngStream rng(5);
  cdp::SimilarityAccumulator acc(n);
  for (int s = 0; s < 200; ++s) acc.add(cdp::sample_dp_partition_via_sticks(n, 3.0, rng));
  const auto sim = acc.matrix();
  for (auto _ : state) benchmark::DoNotOptimize(cdp::optimal_partition(sim, {}, cdp::SearchStrategy::greedy));
}
BENCHMARK(BM_GreedyPartition)->Arg(112)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
