// SPDX-License-Identifier: Apache-2.0
#include "oclmem/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "json_reader.hpp"
#include "oclmem/errors.hpp"

namespace oclmem {

namespace {

using detail::Json;
using detail::ObjectReader;

void check_schema(ObjectReader& r, const std::filesystem::path& path) {
  const int version = r.required<int>("schema_version");
  if (version != kSchemaVersion) {
    throw ConfigError("'" + path.string() + "': unsupported schema_version " +
                      std::to_string(version));
  }
}

PlatformPreset read_platform(ObjectReader r, const std::string& name) {
  PlatformPreset p;
  p.name = name;
  p.capacity_mb = r.required<double>("capacity_mb");
  p.compute_scale = r.optional<double>("compute_scale", 1.0);
  p.load_time_per_sample = r.optional<double>("load_time_per_sample", 0.0);
  r.finish();
  if (!(p.capacity_mb > 0) || !(p.compute_scale > 0) ||
      !(p.load_time_per_sample >= 0)) {
    throw ConfigError("platform '" + name + "': capacity and compute scale "
                      "must be positive, load time non-negative");
  }
  return p;
}

AlgorithmProfile read_profile(ObjectReader r, const std::string& name) {
  AlgorithmProfile p;
  p.name = name;
  p.compute_cost_per_sample = r.required<double>("compute_cost_per_sample");
  p.replay_sampling_cost = r.optional<double>("replay_sampling_cost", 0.0);
  p.optimizer_latency_multiplier =
      r.required<double>("optimizer_latency_multiplier");
  p.optimizer_memory_delta = r.required<double>("optimizer_memory_delta");
  p.optimizer_memory_growth = r.optional<double>("optimizer_memory_growth", 0.0);
  p.base_memory = r.required<double>("base_memory");
  p.per_experience_growth = r.optional<double>("per_experience_growth", 1.0);
  r.finish();
  p.validate();
  return p;
}

ResponseModel read_response(ObjectReader r) {
  ResponseModel m;
  m.batch_knee = r.optional("batch_knee", m.batch_knee);
  m.activation_mb = r.required<double>("activation_mb");
  m.frame_mb = r.required<double>("frame_mb");
  m.spike_threshold = r.optional("spike_threshold", m.spike_threshold);
  m.spike_coefficient = r.optional("spike_coefficient", m.spike_coefficient);
  m.stability_max = r.optional("stability_max", m.stability_max);
  m.stability_scale = r.optional("stability_scale", m.stability_scale);
  m.plasticity_max = r.optional("plasticity_max", m.plasticity_max);
  m.plasticity_steps = r.optional("plasticity_steps", m.plasticity_steps);
  m.advanced_plasticity_bonus =
      r.optional("advanced_plasticity_bonus", m.advanced_plasticity_bonus);
  m.forgetting_rate = r.optional("forgetting_rate", m.forgetting_rate);
  m.advanced_forgetting_scale =
      r.optional("advanced_forgetting_scale", m.advanced_forgetting_scale);
  m.noise = r.optional("noise", m.noise);
  r.finish();
  m.validate();
  return m;
}

BaselinePreset read_baseline(ObjectReader r, BaselinePreset fallback) {
  BaselinePreset b = fallback;
  b.batch_size = r.optional("batch", b.batch_size);
  b.buffer_size = r.optional("buffer", b.buffer_size);
  if (r.has("optimizer")) {
    b.optimizer = parse_optimizer_mode(r.required<std::string>("optimizer"));
  }
  r.finish();
  return b;
}

Preference read_preference(const Json& j, const std::string& path) {
  if (j.is_string()) return parse_preference(j.get<std::string>());
  if (!j.is_array()) {
    throw ConfigError("'" + path + "' must be a string or a list of metrics");
  }
  std::string joined;
  for (const auto& item : j) {
    if (!item.is_string()) {
      throw ConfigError("'" + path + "' entries must be metric names");
    }
    if (!joined.empty()) joined += ',';
    joined += item.get<std::string>();
  }
  return parse_preference(joined);
}

DeviationMode parse_deviation(const std::string& s) {
  if (s == "normalized") return DeviationMode::kNormalized;
  if (s == "raw") return DeviationMode::kRaw;
  throw ConfigError("unknown deviation mode '" + s + "'");
}

}  // namespace

Weights Preference::weights() const {
  if (order.empty()) return balanced_weights();
  return weights_from_preference(order);
}

Preference parse_preference(std::string_view text) {
  Preference p;
  if (text == "balanced") return p;
  if (text == "prefer-latency") {
    p.label = "prefer-latency";
    p.order = {Metric::kLatency, Metric::kMemory, Metric::kPlasticity,
               Metric::kStability};
    return p;
  }
  if (text == "prefer-ps") {
    p.label = "prefer-ps";
    p.order = {Metric::kPlasticity, Metric::kStability, Metric::kMemory,
               Metric::kLatency};
    return p;
  }
  std::stringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) p.order.push_back(parse_metric(item));
  weights_from_preference(p.order);  // validates the permutation
  p.label.clear();
  for (Metric m : p.order) {
    if (!p.label.empty()) p.label += '>';
    p.label += to_string(m);
  }
  return p;
}

ProfileLibrary load_profile_library(const std::filesystem::path& path) {
  const Json j = detail::parse_json_file(path);
  ObjectReader root(j, "");
  check_schema(root, path);
  root.optional<std::string>("description", "");
  ProfileLibrary lib;
  {
    const Json& platforms = root.raw("platforms");
    if (!platforms.is_object()) throw ConfigError("'platforms' must be an object");
    for (const auto& [name, value] : platforms.items()) {
      lib.platforms[name] = read_platform(ObjectReader(value, "platforms." + name), name);
    }
  }
  {
    const Json& algos = root.raw("algorithms");
    if (!algos.is_object()) throw ConfigError("'algorithms' must be an object");
    for (const auto& [name, value] : algos.items()) {
      ObjectReader entry(value, "algorithms." + name);
      AlgorithmEntry a;
      a.profile = read_profile(entry.child("profile"), name);
      a.response = read_response(entry.child("response"));
      entry.finish();
      lib.algorithms[name] = a;
    }
  }
  root.finish();
  return lib;
}

void ScenarioConfig::validate() const {
  if (name.empty()) throw ConfigError("scenario name must not be empty");
  if (num_experiences < 1) {
    throw ConfigError("scenario '" + name + "': num_experiences must be >= 1");
  }
  if (samples_per_experience < 1) {
    throw ConfigError("scenario '" + name +
                      "': samples_per_experience must be >= 1");
  }
  if (!preference.order.empty()) weights_from_preference(preference.order);
  controller.validate();
  thresholds.validate();
  environment().validate();
  if (initial_batch < controller.min_batch ||
      initial_buffer < controller.min_buffer) {
    throw ConfigError("scenario '" + name +
                      "': initial knobs must respect the knob minimums");
  }
  for (const BaselinePreset* b : {&max_a, &max_p, &fixed}) {
    if (b->batch_size < 1 || b->buffer_size < 1) {
      throw ConfigError("scenario '" + name +
                        "': baseline batch and buffer must be >= 1");
    }
  }
}

EnvironmentSpec ScenarioConfig::environment() const {
  EnvironmentSpec s;
  s.profile = profile;
  s.response = response;
  s.capacity_mb = platform.capacity_mb;
  s.compute_scale = platform.compute_scale;
  s.prefetch = prefetch;
  s.samples_per_experience = samples_per_experience;
  s.seed = seed;
  return s;
}

void resolve_controller(ScenarioConfig& sc, const ControllerOverrides& o) {
  const SimulatedEnvironment probe_env(sc.environment());
  auto& c = sc.controller;
  c.capacity_mb = sc.platform.capacity_mb;
  c.batch_sample_mb =
      o.batch_sample_mb > 0 ? o.batch_sample_mb : sc.response.activation_mb;
  c.replay_frame_mb =
      o.replay_frame_mb > 0 ? o.replay_frame_mb : sc.response.frame_mb;
  c.optimizer_default_mb = o.optimizer_default_mb > 0
                               ? o.optimizer_default_mb
                               : estimate_optimizer_default_mb(probe_env);
  c.optimizer_ratio =
      o.optimizer_ratio > 0
          ? o.optimizer_ratio
          : estimate_optimizer_ratio(
                probe_env, static_cast<std::size_t>(sc.num_experiences));
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  const Json j = detail::parse_json_file(path);
  ObjectReader root(j, "");
  check_schema(root, path);
  root.optional<std::string>("description", "");

  ScenarioConfig sc;
  sc.name = root.required<std::string>("name");
  sc.num_experiences = root.required<std::int64_t>("num_experiences");
  sc.samples_per_experience = root.required<std::int64_t>("samples_per_experience");
  if (sc.num_experiences < 1) {
    throw ConfigError("scenario '" + sc.name + "': num_experiences must be >= 1");
  }

  const auto library_path =
      path.parent_path() / root.required<std::string>("library");
  const ProfileLibrary lib = load_profile_library(library_path);

  const auto platform = root.required<std::string>("platform");
  const auto pit = lib.platforms.find(platform);
  if (pit == lib.platforms.end()) {
    throw ConfigError("key 'platform': no platform '" + platform + "' in " +
                      library_path.string());
  }
  sc.platform = pit->second;

  const auto algorithm = root.required<std::string>("algorithm");
  const auto ait = lib.algorithms.find(algorithm);
  if (ait == lib.algorithms.end()) {
    throw ConfigError("key 'algorithm': no algorithm profile '" + algorithm +
                      "' in " + library_path.string());
  }
  sc.profile = ait->second.profile;
  sc.response = ait->second.response;
  sc.response.noise = root.optional("noise", sc.response.noise);
  sc.seed = root.optional<std::uint64_t>("seed", 0);

  if (root.has("preference")) {
    sc.preference = read_preference(root.raw("preference"), "preference");
  }

  ControllerOverrides overrides;
  {
    ObjectReader c = root.child("controller");
    auto& cc = sc.controller;
    cc.initial_threshold = c.required<double>("initial_threshold");
    cc.decay_rate = c.required<double>("decay_rate");
    cc.batch_sensitivity = c.required<double>("alpha");
    cc.replay_sensitivity = c.required<double>("beta");
    cc.safety_margin = c.optional("safety_margin", cc.safety_margin);
    cc.min_batch = c.optional("min_batch", cc.min_batch);
    cc.min_buffer = c.optional("min_buffer", cc.min_buffer);
    cc.initial_health_score =
        c.optional("initial_health_score", cc.initial_health_score);
    sc.initial_batch = c.optional("initial_batch", sc.initial_batch);
    sc.initial_buffer = c.optional("initial_buffer", sc.initial_buffer);
    sc.deviation = parse_deviation(c.optional<std::string>("deviation", "normalized"));
    overrides.batch_sample_mb = c.optional("batch_sample_mb", 0.0);
    overrides.replay_frame_mb = c.optional("replay_frame_mb", 0.0);
    overrides.optimizer_default_mb = c.optional("optimizer_default_mb", 0.0);
    overrides.optimizer_ratio = c.optional("optimizer_ratio", 0.0);
    c.finish();
  }
  {
    ObjectReader t = root.child("thresholds");
    sc.thresholds.plasticity = t.required<double>("plasticity");
    sc.thresholds.stability = t.required<double>("stability");
    sc.thresholds.latency_s = t.required<double>("latency_s");
    sc.thresholds.memory_max_mb =
        t.optional("memory_max_mb", sc.platform.capacity_mb);
    t.finish();
  }
  sc.prefetch.load_time_per_sample = sc.platform.load_time_per_sample;
  if (root.has("prefetch")) {
    ObjectReader p = root.child("prefetch");
    sc.prefetch.enabled = p.optional("enabled", sc.prefetch.enabled);
    sc.prefetch.overlap_efficiency =
        p.optional("overlap_efficiency", sc.prefetch.overlap_efficiency);
    sc.prefetch.load_time_per_sample =
        p.optional("load_time_per_sample", sc.prefetch.load_time_per_sample);
    p.finish();
  }
  if (root.has("baselines")) {
    ObjectReader b = root.child("baselines");
    if (b.has("max_a")) sc.max_a = read_baseline(b.child("max_a"), sc.max_a);
    if (b.has("max_p")) sc.max_p = read_baseline(b.child("max_p"), sc.max_p);
    if (b.has("fixed")) sc.fixed = read_baseline(b.child("fixed"), sc.fixed);
    if (b.has("oracle_optimizer")) {
      sc.oracle_optimizer =
          parse_optimizer_mode(b.required<std::string>("oracle_optimizer"));
    }
    b.finish();
  }
  root.finish();

  resolve_controller(sc, overrides);
  sc.validate();
  return sc;
}

}  // namespace oclmem
