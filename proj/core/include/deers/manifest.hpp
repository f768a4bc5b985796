#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace deers {

// Provenance record written once per artifact-producing command. Input
// digests let downstream commands detect tampered or mismatched inputs.
struct RunManifest {
  std::string command;
  std::string run_id;
  std::string created_utc;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;   // resolved key -> value snapshot
  std::map<std::string, std::string> inputs;   // path -> digest
  std::map<std::string, std::string> outputs;  // path -> digest
};

// FNV-1a 64 over the file bytes, as 16 hex digits.
std::string file_digest_hex(const std::string& path);

// Fills run_id (content hash) and created_utc, then writes JSON.
void write_manifest(RunManifest manifest, const std::string& path);
RunManifest load_manifest(const std::string& path);

// Looks for "*.manifest.json" next to the input; if one lists the input among
// its outputs, the recorded digest must match the file on disk.
void verify_input_against_manifests(const std::string& input_path);

}  // namespace deers
