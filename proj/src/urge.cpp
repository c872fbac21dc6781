// SPDX-License-Identifier: Apache-2.0
#include "oclmem/urge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "oclmem/errors.hpp"

namespace oclmem {

namespace {

constexpr double kDeviationFloor = 1e-9;
// Four factors at this floor still multiply to a positive normal double.
constexpr double kFactorFloor = 1e-75;
const double kFactorCeil = std::nextafter(1.0, 0.0);

double logistic(double x) {
  double y;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    y = e / (1.0 + e);
  }
  return std::clamp(y, kFactorFloor, kFactorCeil);
}

double deviation(double value, double threshold, DeviationMode mode) {
  const double d = value - threshold;
  if (mode == DeviationMode::kRaw) return d;
  return d / std::max(std::abs(threshold), kDeviationFloor);
}

void check_weight(double w, const char* name) {
  if (!std::isfinite(w) || w < 0.0) {
    throw NumericDomainError(std::string("weight ") + name +
                             " must be finite and non-negative");
  }
}

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kMemory: return "memory";
    case Metric::kPlasticity: return "plasticity";
    case Metric::kStability: return "stability";
    case Metric::kLatency: return "latency";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (Metric m : kAllMetrics) {
    if (lower == to_string(m)) return m;
  }
  throw InvalidPreferenceError("unknown metric '" + std::string(name) + "'");
}

double& Weights::operator[](Metric m) {
  switch (m) {
    case Metric::kMemory: return memory;
    case Metric::kPlasticity: return plasticity;
    case Metric::kStability: return stability;
    case Metric::kLatency: return latency;
  }
  return memory;
}

double Weights::operator[](Metric m) const {
  return const_cast<Weights&>(*this)[m];
}

Weights weights_from_preference(std::span<const Metric> order) {
  const std::size_t n = kAllMetrics.size();
  if (order.size() != n) {
    throw InvalidPreferenceError("preference must rank all " +
                                 std::to_string(n) + " metrics, got " +
                                 std::to_string(order.size()));
  }
  std::array<bool, 4> seen{};
  Weights w;
  double total = 0.0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto idx = static_cast<std::size_t>(order[pos]);
    if (seen[idx]) {
      throw InvalidPreferenceError("metric '" +
                                   std::string(to_string(order[pos])) +
                                   "' appears more than once in preference");
    }
    seen[idx] = true;
    const double raw = static_cast<double>(n - pos);
    w[order[pos]] = raw;
    total += raw;
  }
  for (Metric m : kAllMetrics) w[m] /= total;
  return w;
}

Weights balanced_weights() { return Weights{0.25, 0.25, 0.25, 0.25}; }

UrgeScore compute_urge(const MetricSnapshot& snapshot, const Weights& weights,
                       DeviationMode mode) {
  snapshot.validate();
  check_weight(weights.plasticity, "k_p");
  check_weight(weights.stability, "k_s");
  check_weight(weights.latency, "k_l");
  check_weight(weights.memory, "k_m");

  const auto& th = snapshot.thresholds;
  const double dp = deviation(snapshot.plasticity, th.plasticity, mode);
  const double ds = deviation(snapshot.stability, th.stability, mode);
  const double dl = deviation(snapshot.latency_s, th.latency_s, mode);
  const double dm = deviation(snapshot.memory_peak_mb, th.memory_max_mb, mode);

  UrgeScore score;
  score.components = {logistic(-weights.plasticity * dp),
                      logistic(-weights.stability * ds),
                      logistic(weights.latency * dl),
                      logistic(-weights.memory * dm)};
  score.value = score.components[0] * score.components[1] *
                score.components[2] * score.components[3];
  return score;
}

}  // namespace oclmem
