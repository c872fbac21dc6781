// SPDX-License-Identifier: Apache-2.0
#include "json_reader.hpp"

#include <fstream>

namespace oclmem::detail {

Json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

ObjectReader::ObjectReader(const Json& j, std::string path)
    : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) {
    throw ConfigError("'" + (path_.empty() ? std::string("<root>") : path_) +
                      "' must be an object");
  }
}

ObjectReader ObjectReader::child(const std::string& key) {
  if (!j_.contains(key)) {
    throw ConfigError("missing required key '" + join(key) + "'");
  }
  used_.insert(key);
  return ObjectReader(j_.at(key), join(key));
}

void ObjectReader::finish() const {
  for (const auto& [key, value] : j_.items()) {
    if (!used_.count(key)) throw ConfigError("unknown key '" + join(key) + "'");
  }
}

}  // namespace oclmem::detail
