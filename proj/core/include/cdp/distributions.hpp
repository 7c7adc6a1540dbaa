#pragma once

#include <span>
#include <vector>

#include "cdp/rng.hpp"

namespace cdp {

/// Gamma(shape, scale) by Marsaglia-Tsang squeeze rejection, with the
/// U^(1/shape) boost for shape < 1.
double sample_gamma(double shape, double scale, RngStream& rng);

/// log of a Gamma(shape, 1) draw. Stays finite for tiny shapes, where the
/// draw itself underflows to zero.
double sample_log_gamma(double shape, RngStream& rng);

double sample_beta(double a, double b, RngStream& rng);

/// Dirichlet(alpha) via normalized log-gamma draws.
std::vector<double> sample_dirichlet(std::span<const double> alpha, RngStream& rng);

/// Index drawn with probability proportional to `weights` (nonnegative, not
/// all zero).
std::size_t sample_categorical(std::span<const double> weights, RngStream& rng);

/// Index drawn with probability proportional to exp(log_weights).
std::size_t sample_log_categorical(std::span<const double> log_weights, RngStream& rng);

}  // namespace cdp
