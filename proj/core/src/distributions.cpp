#include "cdp/distributions.hpp"

#include <cmath>

#include "cdp/error.hpp"
#include "cdp/log_math.hpp"

namespace cdp {

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(what);
}

// log of a Gamma(shape, 1) draw for shape >= 1
double log_gamma_draw_large(double shape, RngStream& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d) + std::log(v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d) + std::log(v);
  }
}

}  // namespace

double sample_log_gamma(double shape, RngStream& rng) {
  require_positive(shape, "gamma shape must be positive");
  if (shape >= 1.0) return log_gamma_draw_large(shape, rng);
  const double boosted = log_gamma_draw_large(shape + 1.0, rng);
  return boosted + std::log(rng.uniform()) / shape;
}

double sample_gamma(double shape, double scale, RngStream& rng) {
  require_positive(scale, "gamma scale must be positive");
  return std::exp(sample_log_gamma(shape, rng)) * scale;
}

double sample_beta(double a, double b, RngStream& rng) {
  require_positive(a, "beta parameter a must be positive");
  require_positive(b, "beta parameter b must be positive");
  const double la = sample_log_gamma(a, rng);
  const double lb = sample_log_gamma(b, rng);
  // X/(X+Y) computed as a logistic of the log ratio
  return 1.0 / (1.0 + std::exp(lb - la));
}

std::vector<double> sample_dirichlet(std::span<const double> alpha, RngStream& rng) {
  if (alpha.empty()) throw DomainError("Dirichlet needs at least one parameter");
  std::vector<double> logs(alpha.size());
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    require_positive(alpha[j], "Dirichlet parameters must be positive");
    logs[j] = sample_log_gamma(alpha[j], rng);
  }
  normalize_log_weights(logs);
  return logs;
}

std::size_t sample_categorical(std::span<const double> weights, RngStream& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw NumericalFailure("categorical weights sum to zero");
  double u = rng.uniform() * total;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    last_positive = j;
    if (u < weights[j]) return j;
    u -= weights[j];
  }
  return last_positive;
}

std::size_t sample_log_categorical(std::span<const double> log_weights, RngStream& rng) {
  std::vector<double> p(log_weights.begin(), log_weights.end());
  const double norm = normalize_log_weights(p);
  if (is_log_zero(norm) || !std::isfinite(norm)) throw NumericalFailure("all categorical weights are zero");
  return sample_categorical(p, rng);
}

}  // namespace cdp
