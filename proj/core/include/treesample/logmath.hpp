#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace treesample {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// Overflow-safe log(sum(exp(v))). All -inf input gives -inf, never NaN.
inline double logsumexp(std::span<const double> values) {
  double hi = kNegInf;
  for (double v : values) hi = std::max(hi, v);
  if (hi == kNegInf) return kNegInf;
  if (hi == kPosInf) return kPosInf;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

inline double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// Log-probabilities of softmax(values). Throws when every entry is -inf.
inline std::vector<double> log_softmax(std::span<const double> values) {
  const double norm = logsumexp(values);
  if (norm == kNegInf) throw std::domain_error("softmax over all -inf values");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - norm;
  return out;
}

// Sum in the extended reals: -inf absorbs, NaN never produced from -inf.
inline double extended_add(double a, double b) {
  if (a == kNegInf || b == kNegInf) return kNegInf;
  return a + b;
}

// p * log-value with the 0 * -inf = 0 convention.
inline double weighted_log(double p, double log_value) {
  if (p == 0.0) return 0.0;
  return p * log_value;
}

}  // namespace treesample
