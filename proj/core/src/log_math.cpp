#include "cdp/log_math.hpp"

#include <algorithm>
#include <math.h>

namespace cdp {

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_add(double a, double b) {
  if (is_log_zero(a)) return b;
  if (is_log_zero(b)) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double log_sum_exp(std::span<const double> xs) {
  double hi = kLogZero;
  for (double x : xs) hi = std::max(hi, x);
  if (is_log_zero(hi)) return kLogZero;
  double acc = 0.0;
  for (double x : xs) {
    if (!is_log_zero(x)) acc += std::exp(x - hi);
  }
  return hi + std::log(acc);
}

double normalize_log_weights(std::span<double> log_weights) {
  const double total = log_sum_exp(log_weights);
  for (double& w : log_weights) {
    w = (is_log_zero(w) || is_log_zero(total)) ? 0.0 : std::exp(w - total);
  }
  return total;
}

}  // namespace cdp
