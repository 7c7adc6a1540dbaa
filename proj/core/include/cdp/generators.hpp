#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "cdp/partition.hpp"
#include "cdp/partition_prior.hpp"
#include "cdp/rng.hpp"

namespace cdp {

/// Stick weights w_j = V_j prod_{l<j} (1 - V_l) from a finite number of breaks.
/// `residual` is the unbroken remainder prod_j (1 - V_j), tracked directly.
struct StickWeights {
  std::vector<double> weights;
  double residual = 1.0;
};

struct FixedBreaks {
  int count = 1;
};
struct ResidualBelow {
  double epsilon = 1e-10;
};
using Truncation = std::variant<FixedBreaks, ResidualBelow>;

/// GEM(theta): V_j ~ Beta(1, theta).
StickWeights sample_gem(double theta, Truncation truncation, RngStream& rng);

/// Two-parameter GEM: V_j ~ Beta(1 - discount, strength + j * discount), j = 1, 2, ...
StickWeights sample_gem_two_param(double discount, double strength, Truncation truncation, RngStream& rng);

/// A stick broken lazily: sticks are added only when a uniform draw lands in
/// the unbroken remainder, so atom selection carries no truncation error.
class LazyStick {
 public:
  /// `break_fraction(j, rng)` draws V_j for j = 1, 2, ...
  explicit LazyStick(std::function<double(int, RngStream&)> break_fraction);

  /// Index of the atom a fresh uniform draw selects.
  int draw(RngStream& rng);

  const std::vector<double>& weights() const { return weights_; }
  double residual() const { return residual_; }

 private:
  void extend(RngStream& rng);

  std::function<double(int, RngStream&)> break_fraction_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double residual_ = 1.0;
};

/// Partition of n items from ties among draws of a lazily broken GEM(theta) stick.
Partition sample_dp_partition_via_sticks(int n, double theta, RngStream& rng);

/// Finite mixture: w ~ Dirichlet(delta, ..., delta) over k slots, then n iid
/// categorical allocations. Returns raw slot labels.
std::vector<int> sample_finite_mixture_alloc(int k, double delta, int n, RngStream& rng);

/// A parameter value drawn from a base measure. Ties are detected by `id`,
/// never by comparing `value`.
struct Atom {
  std::uint64_t id = 0;
  std::vector<double> value;
  friend bool operator==(const Atom& a, const Atom& b) { return a.id == b.id; }
};

class BaseMeasure {
 public:
  virtual ~BaseMeasure() = default;
  virtual Atom draw(RngStream& rng) = 0;

 protected:
  std::uint64_t next_id() { return counter_++; }

 private:
  std::uint64_t counter_ = 0;
};

/// Independent N(mean_d, sd_d^2) coordinates.
class GaussianBaseMeasure : public BaseMeasure {
 public:
  GaussianBaseMeasure(std::vector<double> mean, std::vector<double> sd);
  Atom draw(RngStream& rng) override;

 private:
  std::vector<double> mean_;
  std::vector<double> sd_;
};

struct AtomDraw {
  std::vector<int> allocation;  // raw labels, one per item
  std::vector<Atom> atoms;      // phi_i, one per item
};

/// Blackwell-MacQueen urn: item m+1 copies each earlier phi_i with probability
/// 1/(m+theta) and draws fresh from `base` with probability theta/(m+theta).
AtomDraw sample_polya_sequence(int n, double theta, BaseMeasure& base, RngStream& rng);

struct ColouredDraw {
  ColouredPartition partition;
  std::vector<int> item_colours;
  std::vector<Atom> atoms;  // empty when no base measures were given
};

/// Stick-breaking-and-colouring: colour weights ~ Dirichlet(gamma), each
/// colour's segment broken with Beta(1, theta_k) sticks; items draw a colour,
/// then an atom within that colour. `bases` is empty or holds one base
/// measure per colour.
ColouredDraw sample_cdp(int n, const ColouredDP& params, std::span<BaseMeasure* const> bases, RngStream& rng);
ColouredDraw sample_cdp(int n, const ColouredDP& params, RngStream& rng);

/// G(B) for one draw G ~ DP(theta, G0) and a set B with G0(B) = base_prob.
/// Atoms fall in B independently with probability base_prob; sticks are
/// broken until the remainder drops below `epsilon`, which then goes to B with
/// probability base_prob as well.
double sample_dp_event_mass(double theta, double base_prob, RngStream& rng, double epsilon = 1e-12);

}  // namespace cdp
