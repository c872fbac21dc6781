// SPDX-License-Identifier: Apache-2.0
#include "oclmem/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "json_reader.hpp"
#include "oclmem/errors.hpp"

namespace oclmem {

namespace {

using detail::Json;
using detail::ObjectReader;

constexpr int kGridPoints = 2000;

void fail(const std::string& what) { throw CalibrationError(what); }

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) {
    g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  }
  return g;
}

void check_shapes(const CalibrationTargets& t) {
  if (t.samples_total < 1) fail("samples_total must be >= 1");
  if (t.sweep_buffer < 0 || t.sweep_batch < 1) {
    fail("sweep_buffer must be >= 0 and sweep_batch >= 1");
  }
  if (t.batch_sweep.size() < 3) fail("need latency/memory at >= 3 batch sizes");
  if (t.buffer_sweep.size() < 3) fail("need stability at >= 3 buffer sizes");

  auto batches = t.batch_sweep;
  std::sort(batches.begin(), batches.end(),
            [](const auto& a, const auto& b) { return a.batch_size < b.batch_size; });
  for (std::size_t i = 0; i < batches.size(); ++i) {
    const auto& p = batches[i];
    if (p.batch_size < 1 || !(p.latency_s > 0) || !(p.memory_mb > 0)) {
      fail("batch targets need batch >= 1 and positive latency and memory");
    }
    if (i == 0) continue;
    const auto& q = batches[i - 1];
    if (p.batch_size == q.batch_size) fail("duplicate batch size in targets");
    if (p.latency_s > q.latency_s) {
      fail("latency targets rise from B=" + std::to_string(q.batch_size) +
           " to B=" + std::to_string(p.batch_size));
    }
    if (p.memory_mb <= q.memory_mb) {
      fail("memory targets do not rise from B=" + std::to_string(q.batch_size) +
           " to B=" + std::to_string(p.batch_size));
    }
  }
  if (!(batches.front().latency_s > batches.back().latency_s)) {
    fail("latency targets are constant in batch size");
  }

  auto buffers = t.buffer_sweep;
  std::sort(buffers.begin(), buffers.end(), [](const auto& a, const auto& b) {
    return a.buffer_size < b.buffer_size;
  });
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    const auto& p = buffers[i];
    if (p.buffer_size < 1 || !(p.stability >= 0 && p.stability <= 1) ||
        !(p.memory_mb > 0)) {
      fail("buffer targets need buffer >= 1, stability in [0, 1], memory > 0");
    }
    if (i == 0) continue;
    const auto& q = buffers[i - 1];
    if (p.buffer_size == q.buffer_size) fail("duplicate buffer size in targets");
    if (p.stability < q.stability) {
      fail("stability targets fall from R=" + std::to_string(q.buffer_size) +
           " to R=" + std::to_string(p.buffer_size));
    }
    if (p.memory_mb < q.memory_mb) {
      fail("memory targets fall from R=" + std::to_string(q.buffer_size) +
           " to R=" + std::to_string(p.buffer_size));
    }
  }

  const auto& pl = t.plugin;
  if (!(pl.latency_default_s > 0) || !(pl.memory_default_mb > 0)) {
    fail("plugin targets need positive default latency and memory");
  }
  if (pl.latency_advanced_s < pl.latency_default_s) {
    fail("advanced plugins cannot be faster than the default optimizer");
  }
  if (pl.memory_advanced_mb < pl.memory_default_mb) {
    fail("advanced plugins cannot use less memory than the default optimizer");
  }
}

struct LatencyPoint {
  double batch;
  double latency;
};

// L(B) = C * max(B, knee) / B, fitted in log space. Returns (C, knee).
std::pair<double, double> fit_latency(const std::vector<LatencyPoint>& pts) {
  double max_b = 0.0;
  for (const auto& p : pts) max_b = std::max(max_b, p.batch);
  auto knees = log_grid(1.0, 4.0 * max_b, kGridPoints);
  for (const auto& p : pts) knees.push_back(p.batch);
  std::sort(knees.begin(), knees.end());

  double best_sse = std::numeric_limits<double>::infinity();
  std::pair<double, double> best{0.0, 0.0};
  for (double knee : knees) {
    double mean = 0.0;
    for (const auto& p : pts) {
      mean += std::log(p.latency) - std::log(std::max(p.batch, knee) / p.batch);
    }
    mean /= static_cast<double>(pts.size());
    double sse = 0.0;
    for (const auto& p : pts) {
      const double r = std::log(p.latency) - mean -
                       std::log(std::max(p.batch, knee) / p.batch);
      sse += r * r;
    }
    // Strict improvement keeps the smallest knee among equal fits.
    if (sse < best_sse * (1.0 - 1e-12)) {
      best_sse = sse;
      best = {std::exp(mean), knee};
    }
  }
  return best;
}

struct MemoryRow {
  double batch;
  double buffer;
  double memory;
};

struct MemoryFit {
  double base = 0.0;
  double per_sample = 0.0;
  double per_frame = 0.0;
  double spike = 0.0;
};

MemoryFit fit_memory(const std::vector<MemoryRow>& rows, double spike_threshold) {
  auto spike_term = [&](double r) {
    const double over = r - spike_threshold;
    return over > 0 ? over * over : 0.0;
  };
  bool any_spike = false;
  for (const auto& r : rows) any_spike = any_spike || spike_term(r.buffer) > 0;

  auto solve = [&](bool with_spike) {
    const Eigen::Index cols = with_spike ? 4 : 3;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), cols);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      a(k, 0) = 1.0;
      a(k, 1) = rows[i].batch;
      a(k, 2) = rows[i].buffer;
      if (with_spike) a(k, 3) = spike_term(rows[i].buffer);
      y(k) = rows[i].memory;
    }
    // Column scaling keeps the QR well conditioned across MB and slot^2.
    Eigen::VectorXd scale = a.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (scale(c) == 0.0) scale(c) = 1.0;
      a.col(c) /= scale(c);
    }
    Eigen::VectorXd x = a.colPivHouseholderQr().solve(y);
    x = x.cwiseQuotient(scale);
    MemoryFit f{x(0), x(1), x(2), with_spike ? x(3) : 0.0};
    return f;
  };

  MemoryFit fit = solve(any_spike);
  if (fit.spike < 0.0) fit = solve(false);
  return fit;
}

// s(R) = s_max * (1 - exp(-R / R0)); grid over R0, closed-form s_max.
std::pair<double, double> fit_stability(const std::vector<BufferTarget>& pts) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& p : pts) {
    lo = std::min(lo, static_cast<double>(p.buffer_size));
    hi = std::max(hi, static_cast<double>(p.buffer_size));
  }
  double best_sse = std::numeric_limits<double>::infinity();
  std::pair<double, double> best{1.0, 1.0};
  for (double r0 : log_grid(lo / 100.0, hi * 100.0, kGridPoints)) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : pts) {
      const double g = -std::expm1(-static_cast<double>(p.buffer_size) / r0);
      num += p.stability * g;
      den += g * g;
    }
    const double smax = den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
    double sse = 0.0;
    for (const auto& p : pts) {
      const double g = -std::expm1(-static_cast<double>(p.buffer_size) / r0);
      const double r = p.stability - smax * g;
      sse += r * r;
    }
    if (sse < best_sse * (1.0 - 1e-12)) {
      best_sse = sse;
      best = {smax, r0};
    }
  }
  return best;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

double Residual::relative() const {
  const double denom = std::max(std::abs(target), 1e-12);
  return std::abs(fitted - target) / denom;
}

double CalibrationResult::max_relative_residual() const {
  double m = 0.0;
  for (const auto& r : residuals) m = std::max(m, r.relative());
  return m;
}

double CalibrationResult::latency(std::int64_t batch, OptimizerMode mode) const {
  return response.compute_latency(profile, batch, 0, mode, 1, samples_total);
}

double CalibrationResult::memory(std::int64_t batch, std::int64_t buffer,
                                 OptimizerMode mode) const {
  return response.peak_memory(profile, batch, buffer, mode, 1);
}

CalibrationResult calibrate_profile(const CalibrationTargets& t,
                                    const ResponseModel& prior) {
  check_shapes(t);

  std::vector<LatencyPoint> lat;
  std::vector<MemoryRow> mem;
  const double rb = static_cast<double>(t.sweep_buffer);
  for (const auto& p : t.batch_sweep) {
    lat.push_back({static_cast<double>(p.batch_size), p.latency_s});
    mem.push_back({static_cast<double>(p.batch_size), rb, p.memory_mb});
  }
  for (const auto& p : t.buffer_sweep) {
    mem.push_back({static_cast<double>(t.sweep_batch),
                   static_cast<double>(p.buffer_size), p.memory_mb});
  }
  if (t.plugin.batch_size) {
    const double b = static_cast<double>(*t.plugin.batch_size);
    lat.push_back({b, t.plugin.latency_default_s});
    mem.push_back({b, rb, t.plugin.memory_default_mb});
  }

  const auto [run_cost, knee] = fit_latency(lat);
  const MemoryFit mf = fit_memory(mem, t.spike_threshold);
  if (!(mf.per_sample > 0) || !(mf.per_frame > 0) || !(mf.base > 0)) {
    fail("memory fit is not increasing in batch and buffer (base " +
         fmt(mf.base) + " MB, " + fmt(mf.per_sample) + " MB/sample, " +
         fmt(mf.per_frame) + " MB/frame)");
  }
  const auto [smax, r0] = fit_stability(t.buffer_sweep);

  CalibrationResult out;
  out.samples_total = t.samples_total;
  out.sweep_buffer = t.sweep_buffer;
  out.profile.name = t.name;
  out.profile.compute_cost_per_sample =
      run_cost / static_cast<double>(t.samples_total);
  out.profile.optimizer_latency_multiplier =
      t.plugin.latency_advanced_s / t.plugin.latency_default_s;
  out.profile.optimizer_memory_delta =
      t.plugin.memory_advanced_mb - t.plugin.memory_default_mb;
  out.profile.base_memory = mf.base;
  out.response = prior;
  out.response.batch_knee = knee;
  out.response.activation_mb = mf.per_sample;
  out.response.frame_mb = mf.per_frame;
  out.response.spike_threshold = t.spike_threshold;
  out.response.spike_coefficient = mf.spike;
  out.response.stability_max = smax;
  out.response.stability_scale = r0;

  using M = OptimizerMode;
  for (const auto& p : t.batch_sweep) {
    const auto b = std::to_string(p.batch_size);
    out.residuals.push_back(
        {"latency B=" + b, p.latency_s, out.latency(p.batch_size, M::kDefault)});
    out.residuals.push_back(
        {"memory B=" + b, p.memory_mb,
         out.memory(p.batch_size, t.sweep_buffer, M::kDefault)});
  }
  for (const auto& p : t.buffer_sweep) {
    const auto r = std::to_string(p.buffer_size);
    out.residuals.push_back({"stability R=" + r, p.stability,
                             out.response.stability_gain(p.buffer_size)});
    out.residuals.push_back(
        {"memory R=" + r, p.memory_mb,
         out.memory(t.sweep_batch, p.buffer_size, M::kDefault)});
  }
  if (t.plugin.batch_size) {
    const auto b = *t.plugin.batch_size;
    const auto bs = std::to_string(b);
    out.residuals.push_back({"plugin latency default B=" + bs,
                             t.plugin.latency_default_s,
                             out.latency(b, M::kDefault)});
    out.residuals.push_back({"plugin latency advanced B=" + bs,
                             t.plugin.latency_advanced_s,
                             out.latency(b, M::kAdvanced)});
    out.residuals.push_back({"plugin memory default B=" + bs,
                             t.plugin.memory_default_mb,
                             out.memory(b, t.sweep_buffer, M::kDefault)});
    out.residuals.push_back({"plugin memory advanced B=" + bs,
                             t.plugin.memory_advanced_mb,
                             out.memory(b, t.sweep_buffer, M::kAdvanced)});
  }

  const auto worst = std::max_element(
      out.residuals.begin(), out.residuals.end(),
      [](const auto& a, const auto& b) { return a.relative() < b.relative(); });
  if (worst->relative() > t.max_relative_residual) {
    fail("fit misses '" + worst->what + "' by " +
         fmt(100.0 * worst->relative()) + "% (target " + fmt(worst->target) +
         ", fitted " + fmt(worst->fitted) + ")");
  }
  return out;
}

CalibrationTargets load_calibration_targets(const std::filesystem::path& path) {
  const Json j = detail::parse_json_file(path);
  ObjectReader root(j, "");
  if (root.required<int>("schema_version") != 1) {
    throw ConfigError("'" + path.string() + "': unsupported schema_version");
  }
  root.optional<std::string>("description", "");
  CalibrationTargets t;
  t.name = root.optional<std::string>("name", t.name);
  t.samples_total = root.required<std::int64_t>("samples_total");
  t.sweep_buffer = root.required<std::int64_t>("sweep_buffer");
  t.sweep_batch = root.required<std::int64_t>("sweep_batch");
  t.spike_threshold = root.optional("spike_threshold", t.spike_threshold);
  t.max_relative_residual =
      root.optional("max_relative_residual", t.max_relative_residual);

  auto list = [&](const std::string& key) -> const Json& {
    const Json& v = root.raw(key);
    if (!v.is_array()) throw ConfigError("'" + key + "' must be a list");
    return v;
  };
  std::size_t i = 0;
  for (const auto& item : list("batch_sweep")) {
    ObjectReader r(item, "batch_sweep[" + std::to_string(i++) + "]");
    t.batch_sweep.push_back({r.required<std::int64_t>("batch"),
                             r.required<double>("latency_s"),
                             r.required<double>("memory_mb")});
    r.finish();
  }
  i = 0;
  for (const auto& item : list("buffer_sweep")) {
    ObjectReader r(item, "buffer_sweep[" + std::to_string(i++) + "]");
    t.buffer_sweep.push_back({r.required<std::int64_t>("buffer"),
                              r.required<double>("stability"),
                              r.required<double>("memory_mb")});
    r.finish();
  }
  {
    ObjectReader p = root.child("plugin");
    t.plugin.latency_default_s = p.required<double>("latency_default_s");
    t.plugin.latency_advanced_s = p.required<double>("latency_advanced_s");
    t.plugin.memory_default_mb = p.required<double>("memory_default_mb");
    t.plugin.memory_advanced_mb = p.required<double>("memory_advanced_mb");
    if (p.has("batch")) t.plugin.batch_size = p.required<std::int64_t>("batch");
    p.finish();
  }
  root.finish();
  return t;
}

}  // namespace oclmem
