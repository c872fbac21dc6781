// SPDX-License-Identifier: Apache-2.0
#include "oclmem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "oclmem/errors.hpp"

namespace oclmem {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

void check_accuracy(double accuracy) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw NumericDomainError("accuracy must lie in [0, 1], got " +
                             std::to_string(accuracy));
  }
}

std::string entry_name(std::size_t after, std::size_t on) {
  return "(" + std::to_string(after) + ", " + std::to_string(on) + ")";
}

}  // namespace

void AccuracyMatrix::set(std::size_t after, std::size_t on, double accuracy) {
  if (on == 0 || after == 0 || on > after) {
    throw std::out_of_range("accuracy entry " + entry_name(after, on) +
                            " is outside the lower triangle");
  }
  check_accuracy(accuracy);
  while (rows_.size() < after) {
    rows_.emplace_back(rows_.size() + 1, kMissing);
  }
  rows_[after - 1][on - 1] = accuracy;
}

void AccuracyMatrix::append_row(std::span<const double> row) {
  const std::size_t k = rows_.size() + 1;
  if (row.size() != k) {
    throw std::invalid_argument("row " + std::to_string(k) + " needs " +
                                std::to_string(k) + " entries, got " +
                                std::to_string(row.size()));
  }
  for (double a : row) check_accuracy(a);
  rows_.emplace_back(row.begin(), row.end());
}

std::optional<double> AccuracyMatrix::get(std::size_t after,
                                          std::size_t on) const {
  if (on == 0 || on > after || after > rows_.size()) return std::nullopt;
  const double v = rows_[after - 1][on - 1];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

double AccuracyMatrix::at(std::size_t after, std::size_t on) const {
  if (auto v = get(after, on)) return *v;
  throw IncompleteMatrixError("accuracy matrix has no entry " +
                              entry_name(after, on));
}

std::size_t AccuracyMatrix::experiences_trained() const noexcept {
  std::size_t k = 0;
  for (const auto& r : rows_) {
    if (std::any_of(r.begin(), r.end(), [](double v) { return std::isnan(v); }))
      break;
    ++k;
  }
  return k;
}

bool AccuracyMatrix::complete_through(std::size_t k) const noexcept {
  return experiences_trained() >= k;
}

std::span<const double> AccuracyMatrix::row(std::size_t after) const {
  if (after == 0 || after > rows_.size()) {
    throw IncompleteMatrixError("accuracy matrix has no row " +
                                std::to_string(after));
  }
  return rows_[after - 1];
}

double plasticity(const AccuracyMatrix& matrix, std::size_t k) {
  if (k == 0) throw std::invalid_argument("plasticity needs K >= 1");
  double sum = 0.0;
  for (std::size_t i = 1; i <= k; ++i) sum += matrix.at(k, i);
  return sum / static_cast<double>(k);
}

double stability(const AccuracyMatrix& matrix, std::size_t k) {
  if (k == 0) throw std::invalid_argument("stability needs K >= 1");
  if (k == 1) return 1.0;
  double forgetting = 0.0;
  for (std::size_t i = 1; i < k; ++i) {
    forgetting += std::max(0.0, matrix.at(i, i) - matrix.at(k, i));
  }
  const double s = 1.0 - forgetting / static_cast<double>(k - 1);
  return std::clamp(s, 0.0, 1.0);
}

void Thresholds::validate() const {
  if (!std::isfinite(plasticity) || !std::isfinite(stability) ||
      !std::isfinite(latency_s) || !std::isfinite(memory_max_mb)) {
    throw NumericDomainError("thresholds must be finite");
  }
  if (memory_max_mb <= 0.0) {
    throw NumericDomainError("memory threshold M_max must be positive");
  }
  if (latency_s < 0.0) {
    throw NumericDomainError("latency threshold must be non-negative");
  }
}

void MetricSnapshot::validate() const {
  thresholds.validate();
  if (!std::isfinite(plasticity) || !std::isfinite(stability) ||
      !std::isfinite(latency_s) || !std::isfinite(memory_peak_mb)) {
    throw NumericDomainError("snapshot values must be finite");
  }
  if (plasticity < 0.0 || plasticity > 1.0 || stability < 0.0 ||
      stability > 1.0) {
    throw NumericDomainError("plasticity and stability must lie in [0, 1]");
  }
  if (latency_s < 0.0) throw NumericDomainError("latency must be >= 0");
  if (memory_peak_mb < 0.0) throw NumericDomainError("memory peak must be >= 0");
}

MetricSnapshot snapshot(const AccuracyMatrix& matrix, std::size_t k,
                        double latency_s, double memory_peak_mb,
                        const Thresholds& thresholds) {
  MetricSnapshot s;
  s.latency_s = latency_s;
  s.memory_peak_mb = memory_peak_mb;
  s.thresholds = thresholds;
  // Validate the caller-provided fields before touching the matrix.
  s.validate();
  s.plasticity = plasticity(matrix, k);
  s.stability = stability(matrix, k);
  return s;
}

}  // namespace oclmem
