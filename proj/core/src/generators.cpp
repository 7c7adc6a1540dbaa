#include "cdp/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "cdp/distributions.hpp"
#include "cdp/error.hpp"

namespace cdp {

namespace {

constexpr double kExhaustedStick = 1e-300;

StickWeights break_stick(const std::function<double(int, RngStream&)>& fraction, const Truncation& truncation,
                         RngStream& rng) {
  StickWeights out;
  auto more = [&]() {
    if (const auto* fixed = std::get_if<FixedBreaks>(&truncation)) {
      return static_cast<int>(out.weights.size()) < fixed->count;
    }
    return out.residual >= std::get<ResidualBelow>(truncation).epsilon;
  };
  if (const auto* fixed = std::get_if<FixedBreaks>(&truncation); fixed && fixed->count < 0) {
    throw DomainError("stick break count must be nonnegative");
  }
  if (const auto* res = std::get_if<ResidualBelow>(&truncation); res && !(res->epsilon > 0.0)) {
    throw DomainError("stick residual threshold must be positive");
  }
  while (more()) {
    const double v = fraction(static_cast<int>(out.weights.size()) + 1, rng);
    out.weights.push_back(v * out.residual);
    out.residual *= 1.0 - v;
  }
  return out;
}

}  // namespace

StickWeights sample_gem(double theta, Truncation truncation, RngStream& rng) {
  if (!(theta > 0.0)) throw DomainError("GEM concentration must be positive");
  return break_stick([theta](int, RngStream& r) { return sample_beta(1.0, theta, r); }, truncation, rng);
}

StickWeights sample_gem_two_param(double discount, double strength, Truncation truncation, RngStream& rng) {
  [[maybe_unused]] PartitionPriorModel check{PitmanYor{discount, strength}};
  return break_stick(
      [discount, strength](int j, RngStream& r) { return sample_beta(1.0 - discount, strength + j * discount, r); },
      truncation, rng);
}

LazyStick::LazyStick(std::function<double(int, RngStream&)> break_fraction)
    : break_fraction_(std::move(break_fraction)) {}

void LazyStick::extend(RngStream& rng) {
  const double v = break_fraction_(static_cast<int>(weights_.size()) + 1, rng);
  const double w = v * residual_;
  weights_.push_back(w);
  cumulative_.push_back((cumulative_.empty() ? 0.0 : cumulative_.back()) + w);
  residual_ *= 1.0 - v;
}

int LazyStick::draw(RngStream& rng) {
  const double u = rng.uniform();
  while (cumulative_.empty() || u >= cumulative_.back()) {
    if (!cumulative_.empty() && residual_ < kExhaustedStick) return static_cast<int>(weights_.size()) - 1;
    extend(rng);
  }
  return static_cast<int>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
}

Partition sample_dp_partition_via_sticks(int n, double theta, RngStream& rng) {
  if (!(theta > 0.0)) throw DomainError("DP concentration must be positive");
  if (n < 1) throw InvalidInput("need at least one item");
  LazyStick stick([theta](int, RngStream& r) { return sample_beta(1.0, theta, r); });
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& l : labels) l = stick.draw(rng);
  return Partition::from_allocation(labels);
}

std::vector<int> sample_finite_mixture_alloc(int k, double delta, int n, RngStream& rng) {
  if (k < 1) throw DomainError("finite mixture needs at least one component");
  if (!(delta > 0.0)) throw DomainError("Dirichlet weight must be positive");
  const std::vector<double> alpha(static_cast<std::size_t>(k), delta);
  const std::vector<double> w = sample_dirichlet(alpha, rng);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& l : labels) l = static_cast<int>(sample_categorical(w, rng));
  return labels;
}

GaussianBaseMeasure::GaussianBaseMeasure(std::vector<double> mean, std::vector<double> sd)
    : mean_(std::move(mean)), sd_(std::move(sd)) {
  if (mean_.size() != sd_.size()) throw InvalidInput("mean and sd differ in length");
  for (double s : sd_) {
    if (!(s > 0.0)) throw DomainError("base measure sd must be positive");
  }
}

Atom GaussianBaseMeasure::draw(RngStream& rng) {
  Atom a{next_id(), std::vector<double>(mean_.size())};
  for (std::size_t d = 0; d < mean_.size(); ++d) a.value[d] = mean_[d] + sd_[d] * rng.normal();
  return a;
}

AtomDraw sample_polya_sequence(int n, double theta, BaseMeasure& base, RngStream& rng) {
  if (!(theta > 0.0)) throw DomainError("DP concentration must be positive");
  if (n < 1) throw InvalidInput("need at least one item");
  AtomDraw out;
  std::map<std::uint64_t, int> label_of_atom;
  for (int m = 0; m < n; ++m) {
    const double u = rng.uniform() * (m + theta);
    Atom atom;
    if (u < m) {
      atom = out.atoms[static_cast<std::size_t>(u)];
    } else {
      atom = base.draw(rng);
    }
    auto [it, inserted] = label_of_atom.try_emplace(atom.id, static_cast<int>(label_of_atom.size()));
    out.allocation.push_back(it->second);
    out.atoms.push_back(std::move(atom));
  }
  return out;
}

ColouredDraw sample_cdp(int n, const ColouredDP& params, std::span<BaseMeasure* const> bases, RngStream& rng) {
  [[maybe_unused]] PartitionPriorModel check{params};
  if (n < 1) throw InvalidInput("need at least one item");
  const std::size_t num_colours = params.colours.size();
  if (!bases.empty() && bases.size() != num_colours) throw InvalidInput("one base measure per colour required");

  std::vector<double> gammas;
  std::vector<LazyStick> sticks;
  for (const auto& cp : params.colours) {
    gammas.push_back(cp.gamma);
    const double theta = cp.theta;
    sticks.emplace_back([theta](int, RngStream& r) { return sample_beta(1.0, theta, r); });
  }
  const std::vector<double> colour_weights = sample_dirichlet(gammas, rng);

  ColouredDraw out;
  std::map<std::pair<int, int>, int> label_of;
  std::map<std::pair<int, int>, Atom> atom_of;
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    const int k = static_cast<int>(sample_categorical(colour_weights, rng));
    const int j = sticks[static_cast<std::size_t>(k)].draw(rng);
    auto [it, inserted] = label_of.try_emplace({k, j}, static_cast<int>(label_of.size()));
    labels.push_back(it->second);
    out.item_colours.push_back(k);
    if (!bases.empty()) {
      auto a = atom_of.find({k, j});
      if (a == atom_of.end()) a = atom_of.emplace(std::pair{k, j}, bases[static_cast<std::size_t>(k)]->draw(rng)).first;
      out.atoms.push_back(a->second);
    }
  }
  out.partition = ColouredPartition::from_items(labels, out.item_colours, static_cast<int>(num_colours));
  return out;
}

ColouredDraw sample_cdp(int n, const ColouredDP& params, RngStream& rng) {
  return sample_cdp(n, params, std::span<BaseMeasure* const>{}, rng);
}

double sample_dp_event_mass(double theta, double base_prob, RngStream& rng, double epsilon) {
  if (!(theta > 0.0)) throw DomainError("DP concentration must be positive");
  if (!(base_prob >= 0.0 && base_prob <= 1.0)) throw DomainError("base probability must lie in [0,1]");
  double residual = 1.0;
  double mass = 0.0;
  while (residual >= epsilon) {
    const double v = sample_beta(1.0, theta, rng);
    if (rng.uniform() < base_prob) mass += v * residual;
    residual *= 1.0 - v;
  }
  if (rng.uniform() < base_prob) mass += residual;
  return mass;
}

}  // namespace cdp
