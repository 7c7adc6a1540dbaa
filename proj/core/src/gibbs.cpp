#include "cdp/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "cdp/distributions.hpp"
#include "cdp/error.hpp"
#include "cdp/log_math.hpp"

namespace cdp {

ChainModel::ChainModel(PartitionPriorModel prior, Eigen::MatrixXd data, std::vector<ConjugateMarginal> likelihoods)
    : prior_(std::move(prior)), data_(std::move(data)), likelihoods_(std::move(likelihoods)) {
  if (data_.rows() < 1) throw InvalidInput("chain needs at least one item");
  if (!likelihoods_.empty() && likelihoods_.size() != 1 &&
      static_cast<int>(likelihoods_.size()) != prior_.num_colours()) {
    throw InvalidInput("need one likelihood per colour or a single shared one");
  }
  for (const auto& l : likelihoods_) {
    if (l.samples() != data_.cols()) throw InvalidInput("data columns do not match the design rows");
  }
}

ChainModel ChainModel::flat(PartitionPriorModel prior, int n) {
  return ChainModel(std::move(prior), Eigen::MatrixXd(n, 0), {});
}

double ChainModel::log_marginal(int colour, const ClusterStats& stats) const {
  if (likelihoods_.empty()) return 0.0;
  const std::size_t k = likelihoods_.size() == 1 ? 0 : static_cast<std::size_t>(colour);
  return likelihoods_[k].log_marginal(stats);
}

ClusterStats ChainModel::stats_of(std::span<const int> items) const {
  ClusterStats s(samples());
  for (int i : items) s.add(data_.row(i).transpose());
  return s;
}

double ChainModel::log_posterior(const ColouredPartition& p) const {
  const double prior = log_eppf(prior_, p);
  if (is_log_zero(prior)) return kLogZero;
  double lik = 0.0;
  const auto& clusters = p.partition().clusters();
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    lik += log_marginal(p.cluster_colours()[j], stats_of(clusters[j]));
  }
  return prior + lik;
}

int ChainModel::default_colour() const {
  return std::holds_alternative<BackgroundDP>(prior_.get()) ? kRegularColour : 0;
}

ChainState::ChainState(std::shared_ptr<const ChainModel> model, const ColouredPartition& initial, RngStream rng)
    : model_(std::move(model)), rng_(std::move(rng)) {
  if (initial.size() != model_->size()) throw InvalidInput("initial partition size does not match the data");
  slot_of_item_.assign(static_cast<std::size_t>(initial.size()), -1);
  const auto& cl = initial.partition().clusters();
  for (std::size_t j = 0; j < cl.size(); ++j) {
    const int colour = initial.cluster_colours()[j];
    if (colour >= model_->num_colours()) throw InvalidInput("initial partition uses an unknown colour");
    Cluster c;
    c.colour = colour;
    c.items = cl[j];
    c.stats = model_->stats_of(c.items);
    c.log_marginal = model_->log_marginal(colour, c.stats);
    for (int i : c.items) slot_of_item_[static_cast<std::size_t>(i)] = static_cast<int>(j);
    clusters_.push_back(std::move(c));
  }
}

ChainState ChainState::singletons(std::shared_ptr<const ChainModel> model, RngStream rng) {
  const int n = model->size();
  Partition p = Partition::singletons(n);
  std::vector<int> colours(static_cast<std::size_t>(n), model->default_colour());
  ColouredPartition cp(std::move(p), std::move(colours), model->num_colours());
  return ChainState(std::move(model), cp, std::move(rng));
}

ColouredPartition ChainState::partition() const {
  std::vector<int> colours(slot_of_item_.size());
  for (std::size_t i = 0; i < slot_of_item_.size(); ++i) {
    colours[i] = clusters_[static_cast<std::size_t>(slot_of_item_[i])].colour;
  }
  return ColouredPartition::from_items(slot_of_item_, colours, model_->num_colours());
}

ColouredCounts ChainState::counts() const {
  ColouredCounts c;
  c.sizes.resize(static_cast<std::size_t>(model_->num_colours()));
  for (const auto& cl : clusters_) {
    c.sizes[static_cast<std::size_t>(cl.colour)].push_back(static_cast<int>(cl.items.size()));
  }
  return c;
}

double ChainState::log_prior() const { return log_eppf(model_->prior(), counts()); }

double ChainState::log_likelihood() const {
  double s = 0.0;
  for (const auto& c : clusters_) s += c.log_marginal;
  return s;
}

void ChainState::check_coherence(double tol) const {
  std::vector<int> seen(slot_of_item_.size(), 0);
  for (std::size_t j = 0; j < clusters_.size(); ++j) {
    const auto& c = clusters_[j];
    if (c.items.empty()) throw NumericalFailure("chain state holds an empty cluster");
    for (int i : c.items) {
      if (slot_of_item_[static_cast<std::size_t>(i)] != static_cast<int>(j)) {
        throw NumericalFailure("item slot index out of sync");
      }
      ++seen[static_cast<std::size_t>(i)];
    }
    const double fresh = model_->log_marginal(c.colour, model_->stats_of(c.items));
    if (!(std::abs(fresh - c.log_marginal) <= tol * std::max(1.0, std::abs(fresh)))) {
      throw NumericalFailure("cached log marginal drifted from recomputed value in slot " + std::to_string(j));
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; })) {
    throw NumericalFailure("chain state does not cover every item exactly once");
  }
  const double cached = log_posterior();
  const double fresh = model_->log_posterior(partition());
  if (!(std::abs(fresh - cached) <= tol * std::max(1.0, std::abs(fresh)))) {
    throw NumericalFailure("cached log posterior drifted from recomputed value");
  }
}

ClusterStats ChainState::withdraw(std::span<const int> items) {
  if (items.empty()) throw InvalidInput("cannot move an empty block");
  const int slot = slot_of(items.front());
  for (int i : items) {
    if (i < 0 || i >= size()) throw InvalidInput("item index out of range");
    if (slot_of(i) != slot) throw InvalidInput("block straddles more than one cluster");
  }
  ClusterStats block = model_->stats_of(items);
  auto& c = clusters_[static_cast<std::size_t>(slot)];
  for (int i : items) {
    c.items.erase(std::find(c.items.begin(), c.items.end(), i));
    slot_of_item_[static_cast<std::size_t>(i)] = -1;
  }
  if (c.items.empty()) {
    const int last = degree() - 1;
    if (slot != last) {
      clusters_[static_cast<std::size_t>(slot)] = std::move(clusters_.back());
      for (int i : clusters_[static_cast<std::size_t>(slot)].items) slot_of_item_[static_cast<std::size_t>(i)] = slot;
    }
    clusters_.pop_back();
  } else {
    c.stats.unmerge(block);
    c.log_marginal = model_->log_marginal(c.colour, c.stats);
  }
  return block;
}

void ChainState::insert(std::span<const int> items, const ClusterStats& stats, int slot, int colour) {
  if (slot == degree()) {
    Cluster c;
    c.colour = colour;
    c.items.assign(items.begin(), items.end());
    c.stats = stats;
    c.log_marginal = model_->log_marginal(colour, stats);
    clusters_.push_back(std::move(c));
  } else {
    auto& c = clusters_[static_cast<std::size_t>(slot)];
    c.items.insert(c.items.end(), items.begin(), items.end());
    c.stats.merge(stats);
    c.log_marginal = model_->log_marginal(c.colour, c.stats);
  }
  for (int i : items) slot_of_item_[static_cast<std::size_t>(i)] = slot;
}

std::vector<MoveOption> move_options(const ChainState& state, std::span<const int> block, const ClusterStats& stats) {
  const ChainModel& model = state.model();
  const int colours = model.num_colours();
  const ColouredCounts counts = state.counts();
  const int m = static_cast<int>(block.size());

  // position of each slot inside its colour's size list
  std::vector<int> position(static_cast<std::size_t>(state.degree()));
  {
    std::vector<int> next(static_cast<std::size_t>(colours), 0);
    for (int s = 0; s < state.degree(); ++s) {
      position[static_cast<std::size_t>(s)] = next[static_cast<std::size_t>(state.clusters()[static_cast<std::size_t>(s)].colour)]++;
    }
  }

  std::vector<double> prior_existing(static_cast<std::size_t>(state.degree()));
  std::vector<double> prior_fresh(static_cast<std::size_t>(colours));
  if (m == 1) {
    const ReallocWeights w = prior_realloc_weights(model.prior(), counts);
    for (int s = 0; s < state.degree(); ++s) {
      const int k = state.clusters()[static_cast<std::size_t>(s)].colour;
      prior_existing[static_cast<std::size_t>(s)] =
          w.existing[static_cast<std::size_t>(k)][static_cast<std::size_t>(position[static_cast<std::size_t>(s)])];
    }
    for (int k = 0; k < colours; ++k) prior_fresh[static_cast<std::size_t>(k)] = w.fresh[static_cast<std::size_t>(k)];
  } else {
    ColouredCounts trial = counts;
    for (int s = 0; s < state.degree(); ++s) {
      const auto k = static_cast<std::size_t>(state.clusters()[static_cast<std::size_t>(s)].colour);
      int& size = trial.sizes[k][static_cast<std::size_t>(position[static_cast<std::size_t>(s)])];
      size += m;
      prior_existing[static_cast<std::size_t>(s)] = log_eppf(model.prior(), trial);
      size -= m;
    }
    for (int k = 0; k < colours; ++k) {
      auto& sizes = trial.sizes[static_cast<std::size_t>(k)];
      sizes.push_back(m);
      prior_fresh[static_cast<std::size_t>(k)] = log_eppf(model.prior(), trial);
      sizes.pop_back();
    }
  }

  std::vector<MoveOption> out;
  out.reserve(static_cast<std::size_t>(state.degree() + colours));
  for (int s = 0; s < state.degree(); ++s) {
    const auto& c = state.clusters()[static_cast<std::size_t>(s)];
    double w = prior_existing[static_cast<std::size_t>(s)];
    if (!is_log_zero(w) && !model.flat_likelihood()) {
      ClusterStats joined = c.stats;
      joined.merge(stats);
      w += model.log_marginal(c.colour, joined) - c.log_marginal;
    }
    out.push_back({s, c.colour, w});
  }
  for (int k = 0; k < colours; ++k) {
    double w = prior_fresh[static_cast<std::size_t>(k)];
    if (!is_log_zero(w)) w += model.log_marginal(k, stats);
    out.push_back({-1, k, w});
  }
  return out;
}

namespace {

double normalized(std::vector<MoveOption>& options, std::vector<double>& probs) {
  probs.resize(options.size());
  for (std::size_t o = 0; o < options.size(); ++o) probs[o] = options[o].log_weight;
  const double norm = normalize_log_weights(probs);
  if (is_log_zero(norm) || !std::isfinite(norm)) throw NumericalFailure("every reallocation option has zero weight");
  return norm;
}

double move_block(ChainState& state, std::span<const int> block) {
  const ClusterStats stats = state.withdraw(block);
  std::vector<MoveOption> options = move_options(state, block, stats);
  std::vector<double> probs;
  const double norm = normalized(options, probs);
  const std::size_t pick = sample_categorical(probs, state.rng());
  const MoveOption& o = options[pick];
  state.insert(block, stats, o.slot < 0 ? state.degree() : o.slot, o.colour);
  return o.log_weight - norm;
}

std::vector<std::pair<ColouredPartition, double>> block_kernel(const ChainState& state, std::span<const int> block) {
  ChainState base = state;
  const ClusterStats stats = base.withdraw(block);
  std::vector<MoveOption> options = move_options(base, block, stats);
  std::vector<double> probs;
  normalized(options, probs);
  std::map<ColouredPartition, double> merged;
  for (std::size_t o = 0; o < options.size(); ++o) {
    if (probs[o] == 0.0) continue;
    ChainState next = base;
    next.insert(block, stats, options[o].slot < 0 ? next.degree() : options[o].slot, options[o].colour);
    merged[next.partition()] += probs[o];
  }
  return {merged.begin(), merged.end()};
}

std::vector<int> sorted_block(std::span<const int> block) {
  std::vector<int> b(block.begin(), block.end());
  std::sort(b.begin(), b.end());
  if (std::adjacent_find(b.begin(), b.end()) != b.end()) throw InvalidInput("block lists an item twice");
  return b;
}

double log_binomial(int m, int s) {
  return log_gamma(m + 1.0) - log_gamma(s + 1.0) - log_gamma(m - s + 1.0);
}

// log of the number of nonempty subsets of at most `cap` items from m
double log_subset_count(int m, int cap) {
  double acc = kLogZero;
  for (int s = 1; s <= std::min(m, cap); ++s) acc = log_add(acc, log_binomial(m, s));
  return acc;
}

}  // namespace

double reallocate_item(ChainState& state, int item) {
  const int block[1] = {item};
  return move_block(state, block);
}

double reallocate_subset(ChainState& state, std::span<const int> block) {
  const std::vector<int> b = sorted_block(block);
  return move_block(state, b);
}

std::vector<std::pair<ColouredPartition, double>> item_kernel(const ChainState& state, int item) {
  const int block[1] = {item};
  return block_kernel(state, block);
}

std::vector<std::pair<ColouredPartition, double>> subset_kernel(const ChainState& state, std::span<const int> block) {
  const std::vector<int> b = sorted_block(block);
  return block_kernel(state, b);
}

void SweepPlan::validate() const {
  if (sweeps < 1) throw InvalidInput("sweep count must be positive");
  if (burn_in < 0 || burn_in >= sweeps) throw InvalidInput("burn-in must lie in [0, sweeps)");
  if (thin < 1) throw InvalidInput("thinning interval must be at least 1");
  if (!(subset_move_rate >= 0.0 && subset_move_rate <= 1.0)) throw InvalidInput("subset move rate must lie in [0,1]");
  if (subset_cap < 1) throw InvalidInput("subset cap must be at least 1");
  if (coherence_check_interval < 0) throw InvalidInput("coherence check interval must be nonnegative");
}

bool random_subset_move(ChainState& state, int cap) {
  const int d = state.degree();
  const int slot = static_cast<int>(state.rng().uniform_index(static_cast<std::uint64_t>(d)));
  std::vector<int> members = state.clusters()[static_cast<std::size_t>(slot)].items;
  const int m = static_cast<int>(members.size());

  // subset size s with probability C(m,s) / N(m), then a uniform s-subset
  const double log_n = log_subset_count(m, cap);
  std::vector<double> size_weights;
  for (int s = 1; s <= std::min(m, cap); ++s) size_weights.push_back(log_binomial(m, s));
  const int s = 1 + static_cast<int>(sample_log_categorical(size_weights, state.rng()));
  for (int i = 0; i < s; ++i) {
    const auto j = i + static_cast<int>(state.rng().uniform_index(static_cast<std::uint64_t>(m - i)));
    std::swap(members[static_cast<std::size_t>(i)], members[static_cast<std::size_t>(j)]);
  }
  std::vector<int> block(members.begin(), members.begin() + s);
  std::sort(block.begin(), block.end());

  const ColouredPartition before = state.partition();
  ChainState backup = state;
  move_block(state, block);
  const int m_after = static_cast<int>(state.clusters()[static_cast<std::size_t>(state.slot_of(block.front()))].items.size());
  const double log_accept = (std::log(static_cast<double>(d)) + log_n) -
                            (std::log(static_cast<double>(state.degree())) + log_subset_count(m_after, cap));
  if (log_accept < 0.0 && std::log(state.rng().uniform()) >= log_accept) {
    RngStream rng = state.rng();
    state = std::move(backup);
    state.rng() = rng;
    return false;
  }
  return !(state.partition() == before);
}

void sweep(ChainState& state, const SweepPlan& plan) {
  for (int i = 0; i < state.size(); ++i) reallocate_item(state, i);
  if (plan.subset_move_rate > 0.0 && state.rng().uniform() < plan.subset_move_rate) {
    random_subset_move(state, plan.subset_cap);
  }
}

std::vector<TraceRecord> run_chain(std::shared_ptr<const ChainModel> model, const SweepPlan& plan,
                                   std::uint64_t stream) {
  plan.validate();
  ChainState state = ChainState::singletons(std::move(model), RngStream(plan.seed, stream));
  std::vector<TraceRecord> trace;
  trace.reserve(static_cast<std::size_t>((plan.sweeps - plan.burn_in) / plan.thin));
  for (int s = 1; s <= plan.sweeps; ++s) {
    sweep(state, plan);
    if (plan.coherence_check_interval > 0 && s % plan.coherence_check_interval == 0) state.check_coherence();
    if (s > plan.burn_in && (s - plan.burn_in) % plan.thin == 0) {
      TraceRecord r;
      r.sweep = s;
      r.partition = state.partition();
      r.degree = r.partition.degree();
      for (int k = 0; k < r.partition.num_colours(); ++k) r.colour_degrees.push_back(r.partition.degree(k));
      r.log_posterior = state.log_posterior();
      trace.push_back(std::move(r));
    }
  }
  return trace;
}

std::vector<TraceRecord> run_chain(const Eigen::MatrixXd& data, const DesignBlock& design,
                                   const PartitionPriorModel& prior, const std::vector<NormalGammaSpec>& likelihood,
                                   const SweepPlan& plan) {
  std::vector<ConjugateMarginal> marginals;
  for (const auto& spec : likelihood) marginals.emplace_back(spec, design);
  auto model = std::make_shared<const ChainModel>(prior, data, std::move(marginals));
  return run_chain(std::move(model), plan);
}

}  // namespace cdp
