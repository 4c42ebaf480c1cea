#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace praim {

/// Provenance record shared by every pipeline command. Later commands merge
/// into the manifest written by earlier ones, so a finished run carries the
/// effective config, the digests of everything it read and the paths of
/// everything it produced.
struct RunManifest {
  std::string tool_version;
  std::string config_json = "{}";  // effective config echo
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;     // path -> content digest
  std::map<std::string, std::string> artifacts;  // role -> path

  // Digest is computed from the file's bytes at call time.
  void record_input(const std::string& path);
  void record_artifact(const std::string& role, const std::string& path);

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);

  // Existing manifests are merged into; absent files start a fresh record.
  static RunManifest load_or_new(const std::string& path);

  // Refuses to write while any recorded artifact is missing on disk.
  void save(const std::string& path) const;
};

}  // namespace praim
