#include "praim/manifest.hpp"

#include <filesystem>

#include "json.hpp"
#include "praim/common.hpp"
#include "praim/version.hpp"

namespace praim {

void RunManifest::record_input(const std::string& path) {
  inputs[path] = file_digest_hex(path);
}

void RunManifest::record_artifact(const std::string& role,
                                  const std::string& path) {
  artifacts[role] = path;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["tool_version"] = tool_version.empty() ? kVersion : tool_version;
  j["config"] = nlohmann::json::parse(config_json);
  j["seed"] = seed;
  j["inputs"] = inputs;
  j["artifacts"] = artifacts;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("manifest is not a JSON object");
  }
  RunManifest m;
  m.tool_version = j.value("tool_version", std::string(kVersion));
  m.config_json = j.contains("config") ? j["config"].dump() : "{}";
  m.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("inputs")) {
    m.inputs = j["inputs"].get<std::map<std::string, std::string>>();
  }
  if (j.contains("artifacts")) {
    m.artifacts = j["artifacts"].get<std::map<std::string, std::string>>();
  }
  return m;
}

RunManifest RunManifest::load_or_new(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    RunManifest m;
    m.tool_version = kVersion;
    return m;
  }
  return from_json(read_text_file(path));
}

void RunManifest::save(const std::string& path) const {
  for (const auto& [role, artifact_path] : artifacts) {
    if (!std::filesystem::exists(artifact_path)) {
      throw IoError("manifest artifact '" + role + "' missing at " +
                    artifact_path);
    }
  }
  write_text_file(path, to_json());
}

}  // namespace praim
