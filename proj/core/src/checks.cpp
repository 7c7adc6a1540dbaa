#include "cdp/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "cdp/distributions.hpp"
#include "cdp/enumerate.hpp"
#include "cdp/error.hpp"
#include "cdp/estimation.hpp"
#include "cdp/generators.hpp"
#include "cdp/log_math.hpp"
#include "cdp/normal_gamma.hpp"

namespace cdp {

namespace {

using Dist = std::vector<std::pair<ColouredPartition, double>>;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

CheckResult finish(int criterion, const char* name, bool passed, const std::ostringstream& detail,
                   const Stopwatch& clock) {
  return CheckResult{criterion, name, passed, detail.str(), clock.seconds()};
}

std::map<Partition, std::size_t> index_of(const std::vector<Partition>& parts) {
  std::map<Partition, std::size_t> idx;
  for (std::size_t k = 0; k < parts.size(); ++k) idx.emplace(parts[k], k);
  return idx;
}

Eigen::MatrixXd random_spd(int dim, RngStream& rng) {
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
  }
  Eigen::MatrixXd t = a * a.transpose() / dim;
  t.diagonal().array() += 0.5;
  return t;
}

Eigen::VectorXd random_vector(int dim, RngStream& rng, double scale = 1.0) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = scale * rng.normal();
  return v;
}

Eigen::MatrixXd random_matrix(int rows, int cols, RngStream& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

// Small regression design: intercept and slope over S equally spaced times,
// plus an optional random X block.
DesignBlock small_design(int samples, int x_cols, RngStream& rng) {
  Eigen::MatrixXd z(samples, 2);
  for (int s = 0; s < samples; ++s) {
    z(s, 0) = 1.0;
    z(s, 1) = s;
  }
  return DesignBlock{z, random_matrix(samples, x_cols, rng)};
}

NormalGammaSpec regular_prior(const DesignBlock& d, RngStream& rng) {
  NormalGammaSpec p;
  p.a = 1.0 + rng.uniform();
  p.b = 0.5 + rng.uniform();
  p.m = random_vector(d.z_cols() + d.x_cols(), rng, 0.5);
  p.t = random_spd(d.z_cols() + d.x_cols(), rng);
  return p;
}

NormalGammaSpec background_prior(const DesignBlock& d, RngStream& rng) {
  NormalGammaSpec p;
  p.a = 1.0 + rng.uniform();
  p.b = 0.5 + rng.uniform();
  p.m = random_vector(d.x_cols(), rng, 0.5);
  p.t = random_spd(d.x_cols(), rng);
  p.fixed_delta = random_vector(d.z_cols(), rng, 0.5);
  return p;
}

}  // namespace

Dist enumerate_posterior(const ChainModel& model) {
  const int n = model.size();
  const int k = model.num_colours();
  std::vector<ColouredPartition> support;
  if (k == 1 && !model.prior().coloured()) {
    for (auto& p : enumerate_partitions(n)) support.push_back(ColouredPartition::monochrome(std::move(p)));
  } else {
    support = enumerate_coloured_partitions(n, k);
  }
  Dist out;
  std::vector<double> logs;
  for (auto& p : support) {
    const double lp = model.log_posterior(p);
    if (is_log_zero(lp)) continue;
    logs.push_back(lp);
    out.emplace_back(std::move(p), 0.0);
  }
  normalize_log_weights(logs);
  for (std::size_t j = 0; j < out.size(); ++j) out[j].second = logs[j];
  return out;
}

Dist apply_sweep_kernel(std::shared_ptr<const ChainModel> model, const Dist& dist) {
  std::map<ColouredPartition, double> current(dist.begin(), dist.end());
  const RngStream unused(0);
  for (int i = 0; i < model->size(); ++i) {
    std::map<ColouredPartition, double> next;
    for (const auto& [p, prob] : current) {
      if (prob == 0.0) continue;
      const ChainState state(model, p, unused);
      for (const auto& [q, t] : item_kernel(state, i)) next[q] += prob * t;
    }
    current = std::move(next);
  }
  return {current.begin(), current.end()};
}

double max_abs_difference(const Dist& a, const Dist& b) {
  std::map<ColouredPartition, double> diff(a.begin(), a.end());
  for (const auto& [p, v] : b) diff[p] -= v;
  double worst = 0.0;
  for (const auto& [p, v] : diff) worst = std::max(worst, std::abs(v));
  return worst;
}

ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> probabilities, double level,
                               double min_expected) {
  if (observed.size() != probabilities.size() || observed.empty()) {
    throw InvalidInput("observed counts and probabilities differ in length");
  }
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  ChiSquareResult r;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  int cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = total * probabilities[k];
    if (e < min_expected) {
      pooled_obs += observed[k];
      pooled_exp += e;
      continue;
    }
    r.statistic += (observed[k] - e) * (observed[k] - e) / e;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    r.statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  } else if (pooled_obs > 0.0) {
    r.statistic = std::numeric_limits<double>::infinity();
  }
  r.dof = std::max(1, cells - 1);
  r.critical = boost::math::quantile(boost::math::chi_squared(r.dof), level);
  r.passed = r.statistic <= r.critical;
  return r;
}

CheckResult check_eppf_normalization(const CheckConfig& cfg) {
  Stopwatch clock;
  std::ostringstream d;
  double worst = 0.0;
  auto record = [&](double log_total) { worst = std::max(worst, std::abs(std::exp(log_total) - 1.0)); };

  for (double theta : cfg.dp_thetas) {
    const PartitionPriorModel model(DirichletProcess{theta});
    for (int n = 1; n <= 8; ++n) {
      std::vector<double> logs;
      for_each_partition(n, [&](std::span<const int> labels, int) {
        logs.push_back(log_eppf_dp(Partition::from_allocation(labels), theta) + cfg.eppf_log_offset);
      });
      record(log_sum_exp(logs));
    }
    for (int n = 1; n <= 8; ++n) {
      std::vector<double> logs;
      for (const auto& a : enumerate_configurations(n)) logs.push_back(log_ewens_config(a, theta));
      record(log_sum_exp(logs));
    }
  }

  const std::vector<PartitionPriorModel> coloured{
      ColouredDP{{{1.0, 0.5}, {2.0, 1.5}}}, ColouredDP{{{0.7, 0.7}, {0.7, 0.7}}}, BackgroundDP{5.0, 1.0},
      BackgroundDP{0.5, 2.0}};
  for (const auto& model : coloured) {
    for (int n = 1; n <= 5; ++n) {
      std::vector<double> logs;
      for (const auto& p : enumerate_coloured_partitions(n, 2)) logs.push_back(log_eppf(model, p));
      record(log_sum_exp(logs));
    }
  }

  const std::vector<PartitionPriorModel> others{DirichletMultinomial{3, 0.5}, PitmanYor{0.5, 1.0}, PitmanYor{0.3, -0.2}};
  for (const auto& model : others) {
    for (int n = 1; n <= 6; ++n) {
      std::vector<double> logs;
      for_each_partition(n, [&](std::span<const int> labels, int) {
        logs.push_back(log_eppf(model, Partition::from_allocation(labels)));
      });
      record(log_sum_exp(logs));
    }
  }
  const bool ok = worst <= 1e-10 && clock.seconds() < 10.0;
  d << "max |sum - 1| = " << worst << " over DP, Ewens, CDP, background, DirMult, PitmanYor";
  return finish(1, "EPPF normalization", ok, d, clock);
}

CheckResult check_ewens_agreement(const CheckConfig& cfg) {
  Stopwatch clock;
  double worst = 0.0;
  for (double theta : cfg.dp_thetas) {
    for (int n = 1; n <= 7; ++n) {
      std::map<std::vector<int>, std::vector<double>> by_config;
      for_each_partition(n, [&](std::span<const int> labels, int) {
        const Partition p = Partition::from_allocation(labels);
        by_config[configuration_of(p).a].push_back(log_eppf_dp(p, theta));
      });
      for (const auto& a : enumerate_configurations(n)) {
        auto it = by_config.find(a.a);
        if (it == by_config.end()) {
          worst = std::numeric_limits<double>::infinity();
          continue;
        }
        worst = std::max(worst, std::abs(log_ewens_config(a, theta) - log_sum_exp(it->second)));
      }
    }
  }
  std::ostringstream d;
  d << "max |log difference| = " << worst << " for n <= 7";
  return finish(2, "Ewens formula agreement", worst <= 1e-10, d, clock);
}

CheckResult check_construction_equivalence(const CheckConfig& cfg) {
  Stopwatch clock;
  constexpr int n = 4;
  constexpr double theta = 1.0;
  const std::vector<Partition> parts = enumerate_partitions(n);
  const auto idx = index_of(parts);
  std::vector<double> probs;
  for (const auto& p : parts) probs.push_back(std::exp(log_eppf_dp(p, theta)));

  RngStream root(cfg.seed, 3);
  std::vector<double> stick(parts.size(), 0.0), polya(parts.size(), 0.0), finite(parts.size(), 0.0);
  {
    RngStream rng = root.split(0);
    for (int s = 0; s < cfg.construction_samples; ++s) stick[idx.at(sample_dp_partition_via_sticks(n, theta, rng))] += 1;
  }
  {
    RngStream rng = root.split(1);
    GaussianBaseMeasure base({0.0}, {1.0});
    for (int s = 0; s < cfg.construction_samples; ++s) {
      polya[idx.at(Partition::from_allocation(sample_polya_sequence(n, theta, base, rng).allocation))] += 1;
    }
  }
  {
    RngStream rng = root.split(2);
    const int k = cfg.finite_mixture_components;
    for (int s = 0; s < cfg.construction_samples; ++s) {
      finite[idx.at(Partition::from_allocation(sample_finite_mixture_alloc(k, theta / k, n, rng)))] += 1;
    }
  }
  const ChiSquareResult a = chi_square_gof(stick, probs);
  const ChiSquareResult b = chi_square_gof(polya, probs);
  const ChiSquareResult c = chi_square_gof(finite, probs);
  std::ostringstream d;
  d << "chi2 (crit " << a.critical << ", dof " << a.dof << "): stick " << a.statistic << ", polya " << b.statistic
    << ", finite k=" << cfg.finite_mixture_components << " " << c.statistic;
  const bool ok = a.passed && b.passed && c.passed && clock.seconds() < 60.0;
  return finish(3, "construction equivalence", ok, d, clock);
}

CheckResult check_dp_moments(const CheckConfig& cfg) {
  Stopwatch clock;
  constexpr double q = 0.3;
  RngStream root(cfg.seed, 4);
  bool ok = true;
  std::ostringstream d;
  for (double theta : {1.0, 5.0}) {
    RngStream rng = root.split(static_cast<std::uint64_t>(theta));
    double sum = 0.0, sum_sq = 0.0;
    for (int r = 0; r < cfg.moment_replicates; ++r) {
      const double g = sample_dp_event_mass(theta, q, rng);
      sum += g;
      sum_sq += g * g;
    }
    const double m = cfg.moment_replicates;
    const double mean = sum / m;
    const double var = (sum_sq - m * mean * mean) / (m - 1.0);
    const double target_var = q * (1.0 - q) / (1.0 + theta);
    const double rel = std::abs(var - target_var) / target_var;
    ok = ok && std::abs(mean - q) <= 0.01 && rel <= 0.10;
    if (d.tellp() > 0) d << "; ";
    d << "theta=" << theta << ": mean " << mean << " (target " << q << "), var " << var << " (target " << target_var
      << ", rel err " << rel << ")";
  }
  return finish(4, "DP moments", ok, d, clock);
}

CheckResult check_conjugate_chain_rule(const CheckConfig& cfg) {
  Stopwatch clock;
  RngStream rng(cfg.seed, 5);
  double worst_chain = 0.0, worst_stacked = 0.0;
  for (int inst = 0; inst < cfg.marginal_instances; ++inst) {
    const int samples = 1 + static_cast<int>(rng.uniform_index(4));
    const int x_cols = static_cast<int>(rng.uniform_index(3));
    const DesignBlock design = small_design(samples, x_cols, rng);
    const bool background = inst % 2 == 1;
    const NormalGammaSpec prior = background ? background_prior(design, rng) : regular_prior(design, rng);
    const ConjugateMarginal lm(prior, design);

    const int e = 1 + static_cast<int>(rng.uniform_index(5));
    const Eigen::MatrixXd rows = random_matrix(e, samples, rng, 1.5);
    ClusterStats all(samples);
    for (int i = 0; i < e; ++i) all.add(rows.row(i).transpose());
    const double direct = lm.log_marginal(all);
    const double scale = std::max(1.0, std::abs(direct));

    for (int order = 0; order < 3; ++order) {
      std::vector<int> perm(static_cast<std::size_t>(e));
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = e - 1; i > 0; --i) {
        std::swap(perm[static_cast<std::size_t>(i)], perm[rng.uniform_index(static_cast<std::uint64_t>(i) + 1)]);
      }
      ClusterStats acc(samples);
      double telescoped = 0.0;
      for (int i : perm) {
        const ClusterStats item = ClusterStats::of_item(rows.row(i).transpose());
        telescoped += lm.log_predictive(item, acc);
        acc.merge(item);
      }
      worst_chain = std::max(worst_chain, std::abs(telescoped - direct) / scale);
    }
    if (e <= 3) {
      worst_stacked = std::max(worst_stacked, std::abs(log_marginal_stacked(rows, design, prior) - direct) / scale);
    }
  }
  std::ostringstream d;
  d << cfg.marginal_instances << " instances: max telescoping error " << worst_chain << ", max stacked-t error "
    << worst_stacked;
  return finish(5, "conjugate chain rule", worst_chain <= 1e-8 && worst_stacked <= 1e-8, d, clock);
}

CheckResult check_gibbs_invariance(const CheckConfig& cfg) {
  Stopwatch clock;
  RngStream rng(cfg.seed, 6);
  const DesignBlock design = small_design(3, 1, rng);
  const NormalGammaSpec regular = regular_prior(design, rng);
  const NormalGammaSpec other = regular_prior(design, rng);
  const NormalGammaSpec background = background_prior(design, rng);

  struct Case {
    PartitionPriorModel prior;
    int n;
    std::vector<NormalGammaSpec> specs;
  };
  const std::vector<Case> cases{
      {DirichletProcess{1.3}, 4, {regular}},
      {DirichletMultinomial{3, 0.8}, 4, {regular}},
      {PitmanYor{0.4, 0.7}, 4, {regular}},
      {ColouredDP{{{1.0, 0.5}, {2.0, 1.5}}}, 3, {regular, other}},
      {BackgroundDP{2.0, 1.0}, 3, {background, regular}},
  };
  double worst = 0.0;
  std::ostringstream d;
  for (const auto& c : cases) {
    std::vector<ConjugateMarginal> lms;
    for (const auto& s : c.specs) lms.emplace_back(s, design);
    auto model = std::make_shared<const ChainModel>(c.prior, random_matrix(c.n, 3, rng, 1.5), std::move(lms));
    const Dist exact = enumerate_posterior(*model);
    const double err = max_abs_difference(apply_sweep_kernel(model, exact), exact);
    worst = std::max(worst, err);
    if (d.tellp() > 0) d << "; ";
    d << c.prior.name() << " " << err;
  }
  const bool ok = worst <= 1e-10 && clock.seconds() < 60.0;
  return finish(6, "Gibbs invariance", ok, d, clock);
}

CheckResult check_gibbs_convergence(const CheckConfig& cfg) {
  Stopwatch clock;
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(3, 1);
  const DesignBlock design = DesignBlock::z_only(z);
  NormalGammaSpec prior;
  prior.a = 2.0;
  prior.b = 1.0;
  prior.m = Eigen::VectorXd::Zero(1);
  prior.t = Eigen::MatrixXd::Constant(1, 1, 0.5);
  Eigen::MatrixXd data(5, 3);
  data << -0.8, -1.1, -0.6,  //
      -0.5, -0.9, -1.2,      //
      0.1, 0.4, -0.2,        //
      0.9, 1.3, 0.7,         //
      1.4, 0.6, 1.1;
  auto model = std::make_shared<const ChainModel>(PartitionPriorModel(DirichletProcess{1.0}), data,
                                                  std::vector<ConjugateMarginal>{ConjugateMarginal(prior, design)});
  SweepPlan plan;
  plan.sweeps = cfg.chain_sweeps;
  plan.burn_in = std::min(1000, cfg.chain_sweeps / 10);
  plan.thin = cfg.chain_thin;
  plan.seed = cfg.seed;
  plan.coherence_check_interval = 10000;
  const auto trace = run_chain(model, plan, 7);

  const Dist exact = enumerate_posterior(*model);
  std::map<ColouredPartition, std::size_t> idx;
  std::vector<double> probs;
  for (const auto& [p, pr] : exact) {
    idx.emplace(p, probs.size());
    probs.push_back(pr);
  }
  std::vector<double> counts(probs.size(), 0.0);
  for (const auto& r : trace) counts[idx.at(r.partition)] += 1.0;
  const ChiSquareResult chi = chi_square_gof(counts, probs);
  std::ostringstream d;
  d << trace.size() << " retained of " << plan.sweeps << " sweeps (thin " << plan.thin << "), " << probs.size()
    << " partitions: chi2 " << chi.statistic << " vs crit " << chi.critical << " (dof " << chi.dof << ")";
  return finish(7, "Gibbs convergence", chi.passed, d, clock);
}

CheckResult check_loss_optimizer(const CheckConfig& cfg) {
  Stopwatch clock;
  RngStream rng(cfg.seed, 8);
  const LossSpec loss;
  int exact_ok = 0, greedy_bounded = 0, greedy_exact = 0;
  for (int inst = 0; inst < cfg.loss_instances; ++inst) {
    const int n = 3 + inst % 7;
    // similarity from a handful of noisy copies of a random partition
    const Partition truth = sample_dp_partition_via_sticks(n, 0.5 + 2.0 * rng.uniform(), rng);
    const int draws = 5 + static_cast<int>(rng.uniform_index(20));
    SimilarityAccumulator acc(n);
    for (int s = 0; s < draws; ++s) {
      std::vector<int> labels = truth.labels();
      for (auto& l : labels) {
        if (rng.uniform() < 0.3) l = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      }
      acc.add(Partition::from_allocation(labels));
    }
    const SimilarityMatrix sim = acc.matrix();

    Partition brute;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : enumerate_partitions(n)) {
      const double l = expected_pairwise_loss(p, sim, loss);
      if (l < best - 1e-12) {
        best = l;
        brute = p;
      }
    }
    const Partition exact = optimal_partition(sim, loss, SearchStrategy::exact);
    const Partition greedy = optimal_partition(sim, loss, SearchStrategy::greedy);
    const double lg = expected_pairwise_loss(greedy, sim, loss);
    const double bound = std::min(expected_pairwise_loss(Partition::singletons(n), sim, loss),
                                  expected_pairwise_loss(Partition::one_cluster(n), sim, loss));
    exact_ok += exact == brute;
    greedy_bounded += lg <= bound + 1e-12;
    greedy_exact += std::abs(lg - best) <= 1e-12;
  }
  const double rate = static_cast<double>(greedy_exact) / cfg.loss_instances;
  std::ostringstream d;
  d << "exact = brute force on " << exact_ok << "/" << cfg.loss_instances << ", greedy bounded on " << greedy_bounded
    << "/" << cfg.loss_instances << ", greedy optimal on " << greedy_exact << "/" << cfg.loss_instances;
  if (rate < 0.8) d << " (below 80%)";
  const bool ok = exact_ok == cfg.loss_instances && greedy_bounded == cfg.loss_instances && rate >= 0.5;
  return finish(8, "loss optimizer", ok, d, clock);
}

CheckResult run_check(int criterion, const CheckConfig& cfg) {
  switch (criterion) {
    case 1: return check_eppf_normalization(cfg);
    case 2: return check_ewens_agreement(cfg);
    case 3: return check_construction_equivalence(cfg);
    case 4: return check_dp_moments(cfg);
    case 5: return check_conjugate_chain_rule(cfg);
    case 6: return check_gibbs_invariance(cfg);
    case 7: return check_gibbs_convergence(cfg);
    case 8: return check_loss_optimizer(cfg);
    default: throw InvalidInput("unknown check number " + std::to_string(criterion));
  }
}

std::string format_result(const CheckResult& r) {
  std::ostringstream os;
  os.precision(3);
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.criterion << "] " << r.name << " (" << r.seconds << " s): "
     << r.detail;
  return os.str();
}

}  // namespace cdp
