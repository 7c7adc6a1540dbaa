#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace cdp {

/// Log-probability of an impossible event. Functions that can produce it
/// return it directly instead of letting -inf propagate through sums, and
/// callers test for it with is_log_zero().
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline bool is_log_zero(double x) { return x == kLogZero; }

/// Reentrant log|Gamma(x)|; std::lgamma writes the global signgam.
double log_gamma(double x);

/// log(exp(a) + exp(b)) with kLogZero handled.
double log_add(double a, double b);

/// log(sum exp(x_i)); kLogZero entries are skipped. Empty or all-zero input
/// yields kLogZero.
double log_sum_exp(std::span<const double> xs);

/// Normalizes log weights in place into probabilities by max-log subtraction.
/// Returns the log normalizing constant.
double normalize_log_weights(std::span<double> log_weights);

}  // namespace cdp
