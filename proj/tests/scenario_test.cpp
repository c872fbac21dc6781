// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <string>

#include <json.hpp>

#include "oclmem/errors.hpp"
#include "oclmem/scenario.hpp"
#include "test_support.hpp"

using namespace oclmem;
using oclmem::testing::TempDir;
using nlohmann::json;

namespace {

json bundled_json(const std::string& name) {
  std::ifstream in(oclmem::testing::scenario_path(name));
  json j = json::parse(in);
  j["library"] = (oclmem::testing::data_dir() / "profiles.json").string();
  return j;
}

ScenarioConfig load_from(const TempDir& dir, const json& j) {
  return load_scenario(dir.write("s.json", j.dump()));
}

std::string load_error(const TempDir& dir, const json& j) {
  try {
    load_from(dir, j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Scenario, AllBundledScenariosLoad) {
  for (const auto& name : oclmem::testing::bundled_names()) {
    const ScenarioConfig sc = oclmem::testing::bundled(name);
    EXPECT_EQ(sc.name, name);
    EXPECT_EQ(sc.num_experiences, 9);
    EXPECT_EQ(sc.preference.label, "balanced");
    EXPECT_NO_THROW(sc.validate());
  }
}

TEST(Scenario, ControllerConstantsComeFromTheSimulator) {
  const ScenarioConfig sc = oclmem::testing::bundled("xavier-gss");
  EXPECT_EQ(sc.controller.capacity_mb, sc.platform.capacity_mb);
  EXPECT_EQ(sc.controller.batch_sample_mb, sc.response.activation_mb);
  EXPECT_EQ(sc.controller.replay_frame_mb, sc.response.frame_mb);
  EXPECT_NEAR(sc.controller.optimizer_default_mb, sc.profile.base_memory, 1e-9);
  // k includes the plugin memory accumulated by the last experience.
  const double adv = sc.profile.base_memory + sc.profile.optimizer_memory_delta +
                     sc.profile.optimizer_memory_growth *
                         static_cast<double>(sc.num_experiences - 1);
  EXPECT_NEAR(sc.controller.optimizer_ratio, adv / sc.profile.base_memory, 1e-12);
  EXPECT_EQ(sc.thresholds.memory_max_mb, sc.platform.capacity_mb);
  EXPECT_EQ(sc.prefetch.load_time_per_sample,
            sc.platform.load_time_per_sample);
}

TEST(Scenario, ExplicitOverridesWin) {
  TempDir dir;
  json j = bundled_json("orin-er");
  j["controller"]["optimizer_ratio"] = 1.25;
  j["controller"]["batch_sample_mb"] = 3.0;
  j["prefetch"]["load_time_per_sample"] = 0.01;
  j["thresholds"]["memory_max_mb"] = 20000;
  const ScenarioConfig sc = load_from(dir, j);
  EXPECT_EQ(sc.controller.optimizer_ratio, 1.25);
  EXPECT_EQ(sc.controller.batch_sample_mb, 3.0);
  EXPECT_EQ(sc.prefetch.load_time_per_sample, 0.01);
  EXPECT_EQ(sc.thresholds.memory_max_mb, 20000.0);
}

TEST(Scenario, UnknownKeysAreRejectedWithTheirPath) {
  TempDir dir;
  json j = bundled_json("orin-er");
  j["controller"]["gamma"] = 1.0;
  EXPECT_NE(load_error(dir, j).find("controller.gamma"), std::string::npos);

  j = bundled_json("orin-er");
  j["extra"] = true;
  EXPECT_NE(load_error(dir, j).find("extra"), std::string::npos);

  j = bundled_json("orin-er");
  j["baselines"]["max_a"]["optimiser"] = "advanced";
  EXPECT_NE(load_error(dir, j).find("baselines.max_a.optimiser"),
            std::string::npos);
}

TEST(Scenario, MissingOrMistypedKeys) {
  TempDir dir;
  json j = bundled_json("orin-er");
  j["controller"].erase("alpha");
  EXPECT_NE(load_error(dir, j).find("controller.alpha"), std::string::npos);

  j = bundled_json("orin-er");
  j["num_experiences"] = "nine";
  EXPECT_FALSE(load_error(dir, j).empty());

  j = bundled_json("orin-er");
  j["schema_version"] = 2;
  EXPECT_FALSE(load_error(dir, j).empty());

  j = bundled_json("orin-er");
  j["platform"] = "tpu";
  EXPECT_NE(load_error(dir, j).find("tpu"), std::string::npos);

  j = bundled_json("orin-er");
  j["controller"]["initial_threshold"] = 1.5;
  EXPECT_FALSE(load_error(dir, j).empty());
}

TEST(Scenario, PreferenceForms) {
  EXPECT_EQ(parse_preference("balanced").weights().latency, 0.25);
  const Preference lat = parse_preference("prefer-latency");
  EXPECT_EQ(lat.weights().latency, 0.4);
  EXPECT_EQ(lat.weights().stability, 0.1);
  const Preference ps = parse_preference("prefer-ps");
  EXPECT_EQ(ps.weights().plasticity, 0.4);
  EXPECT_EQ(ps.weights().latency, 0.1);
  const Preference custom =
      parse_preference("memory,plasticity,stability,latency");
  EXPECT_EQ(custom.label, "memory>plasticity>stability>latency");
  EXPECT_EQ(custom.weights().memory, 0.4);
  EXPECT_THROW(parse_preference("memory,plasticity"), InvalidPreferenceError);
  EXPECT_THROW(parse_preference("fast"), InvalidPreferenceError);

  TempDir dir;
  json j = bundled_json("orin-er");
  j["preference"] = {"stability", "plasticity", "latency", "memory"};
  const ScenarioConfig sc = load_from(dir, j);
  EXPECT_EQ(sc.preference.weights().stability, 0.4);
}

TEST(Scenario, MalformedJsonIsAConfigError) {
  TempDir dir;
  const auto p = dir.write("bad.json", "{\"schema_version\": 1,");
  EXPECT_THROW(load_scenario(p), ConfigError);
  EXPECT_THROW(load_scenario(dir.path() / "missing.json"), ConfigError);
}

TEST(Scenario, LibraryRejectsUnknownProfileKeys) {
  TempDir dir;
  std::ifstream in(oclmem::testing::data_dir() / "profiles.json");
  json lib = json::parse(in);
  lib["algorithms"]["ER"]["profile"]["energy_per_sample"] = 1.0;
  const auto p = dir.write("lib.json", lib.dump());
  try {
    load_profile_library(p);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("energy_per_sample"),
              std::string::npos);
  }
}
