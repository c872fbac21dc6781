// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace oclmem {

/// Lower-triangular record of test accuracies. Entry (k, i) is the accuracy
/// on experience i measured after training experience k, with 1 <= i <= k.
/// Indices are 1-based to match the usual continual-learning notation.
class AccuracyMatrix {
 public:
  AccuracyMatrix() = default;

  /// Sets entry (after, on). Rows are created on demand; every accuracy must
  /// lie in [0, 1].
  void set(std::size_t after, std::size_t on, double accuracy);

  /// Appends row K+1; `row` must hold exactly K+1 accuracies.
  void append_row(std::span<const double> row);

  std::optional<double> get(std::size_t after, std::size_t on) const;

  /// Like get() but throws IncompleteMatrixError for a missing entry.
  double at(std::size_t after, std::size_t on) const;

  /// Number of rows allocated (highest `after` index seen).
  std::size_t rows() const noexcept { return rows_.size(); }

  /// K: the largest k such that rows 1..k are all complete.
  std::size_t experiences_trained() const noexcept;

  bool complete_through(std::size_t k) const noexcept;

  std::span<const double> row(std::size_t after) const;

 private:
  // rows_[k-1] has k slots; NaN marks a missing entry.
  std::vector<std::vector<double>> rows_;
};

/// Mean accuracy over experiences 1..K, evaluated with the model after K.
double plasticity(const AccuracyMatrix& matrix, std::size_t k);

/// 1 for K = 1, otherwise one minus the mean forgetting over experiences
/// 1..K-1 where forgetting F_i = max(0, a[i][i] - a[K][i]); clamped to [0, 1].
double stability(const AccuracyMatrix& matrix, std::size_t k);

struct Thresholds {
  double plasticity = 0.0;
  double stability = 0.0;
  double latency_s = 0.0;
  double memory_max_mb = 1.0;

  void validate() const;
};

struct MetricSnapshot {
  double plasticity = 0.0;
  double stability = 0.0;
  double latency_s = 0.0;
  double memory_peak_mb = 0.0;
  Thresholds thresholds;

  void validate() const;
};

MetricSnapshot snapshot(const AccuracyMatrix& matrix, std::size_t k,
                        double latency_s, double memory_peak_mb,
                        const Thresholds& thresholds);

}  // namespace oclmem
