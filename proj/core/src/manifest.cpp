#include "deers/manifest.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "deers/log.hpp"
#include "deers/types.hpp"

namespace deers {

namespace {

std::uint64_t fnv1a64_update(std::uint64_t h, const char* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open '{}' for digest", path));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a64_update(h, buf, static_cast<std::size_t>(in.gcount()));
  return fmt::format("{:016x}", h);
}

namespace {

nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["run_id"] = m.run_id;
  j["command"] = m.command;
  j["created_utc"] = m.created_utc;
  j["seed"] = m.seed;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  return j;
}

}  // namespace

void write_manifest(RunManifest manifest, const std::string& path) {
  const auto now = std::chrono::system_clock::now();
  manifest.created_utc = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));

  // run id = content hash of everything except the id itself
  manifest.run_id.clear();
  const std::string body = to_json(manifest).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a64_update(h, body.data(), body.size());
  manifest.run_id = fmt::format("{:016x}", h);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write manifest '{}'", path));
  out << to_json(manifest).dump(2) << '\n';
  if (!out) throw ValidationError(fmt::format("short write on manifest '{}'", path));
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open manifest '{}'", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(fmt::format("{}: invalid manifest JSON: {}", path, e.what()));
  }
  RunManifest m;
  m.run_id = j.value("run_id", "");
  m.command = j.value("command", "");
  m.created_utc = j.value("created_utc", "");
  m.seed = j.value("seed", std::uint64_t{0});
  for (const auto& [k, v] : j.value("config", nlohmann::json::object()).items())
    m.config[k] = v.is_string() ? v.get<std::string>() : v.dump();
  for (const auto& [k, v] : j.value("inputs", nlohmann::json::object()).items())
    m.inputs[k] = v.get<std::string>();
  for (const auto& [k, v] : j.value("outputs", nlohmann::json::object()).items())
    m.outputs[k] = v.get<std::string>();
  return m;
}

void verify_input_against_manifests(const std::string& input_path) {
  namespace fs = std::filesystem;
  const fs::path input(input_path);
  const fs::path dir = input.has_parent_path() ? input.parent_path() : fs::path(".");
  if (!fs::is_directory(dir)) return;

  const std::string canonical = fs::weakly_canonical(input).string();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (!name.ends_with(".manifest.json")) continue;
    RunManifest m;
    try {
      m = load_manifest(entry.path().string());
    } catch (const ValidationError&) {
      continue;  // unrelated file
    }
    for (const auto& [out_path, digest] : m.outputs) {
      if (fs::weakly_canonical(fs::path(out_path)).string() != canonical) continue;
      const std::string actual = file_digest_hex(input_path);
      if (actual != digest)
        throw ValidationError(fmt::format(
            "input '{}' does not match manifest '{}' (digest {} != recorded {})", input_path,
            entry.path().string(), actual, digest));
      log_debug("input '{}' verified against manifest '{}'", input_path, entry.path().string());
      return;
    }
  }
}

}  // namespace deers
