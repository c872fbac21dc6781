// SPDX-License-Identifier: Apache-2.0
// Strict JSON object access: every read is type-checked, and finish() rejects
// keys nobody asked for. Errors carry the dotted key path.
#pragma once

#include <filesystem>
#include <set>
#include <string>

#include <json.hpp>

#include "oclmem/errors.hpp"

namespace oclmem::detail {

using Json = nlohmann::json;

Json parse_json_file(const std::filesystem::path& path);

class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path);

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T required(const std::string& key) {
    if (!j_.contains(key)) {
      throw ConfigError("missing required key '" + join(key) + "'");
    }
    return convert<T>(key);
  }

  template <class T>
  T optional(const std::string& key, T fallback) {
    if (!j_.contains(key)) return fallback;
    return convert<T>(key);
  }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  ObjectReader child(const std::string& key);

  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  /// Throws if the object holds a key that was never read.
  void finish() const;

 private:
  template <class T>
  T convert(const std::string& key) {
    used_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("key '" + join(key) + "': " + e.what());
    }
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace oclmem::detail
