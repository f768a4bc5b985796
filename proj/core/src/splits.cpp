#include "deers/splits.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

namespace deers {

void SplitFractions::validate() const {
  if (!(train > 0.0 && train < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
  if (!(sim > 0.0)) throw ConfigError("sim fraction must be positive");
  if (train + sim >= 1.0) throw ConfigError("train + sim fractions must leave an eval share");
}

std::map<std::string, std::vector<Session>> split_sessions(const std::vector<Session>& sessions,
                                                           const SplitFractions& fractions) {
  fractions.validate();
  const std::size_t n = sessions.size();
  if (n < 3) throw ValidationError("need at least 3 sessions to split");
  std::size_t n_train = static_cast<std::size_t>(fractions.train * static_cast<double>(n));
  std::size_t n_sim = static_cast<std::size_t>(fractions.sim * static_cast<double>(n));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 2);
  n_sim = std::clamp<std::size_t>(n_sim, 1, n - n_train - 1);

  std::map<std::string, std::vector<Session>> out;
  out["train"] = {sessions.begin(), sessions.begin() + n_train};
  out["sim"] = {sessions.begin() + n_train, sessions.begin() + n_train + n_sim};
  out["eval"] = {sessions.begin() + n_train + n_sim, sessions.end()};
  return out;
}

void write_split_manifest(const SplitManifest& manifest, const std::string& path) {
  nlohmann::ordered_json j;
  j["kind"] = "deers-split-manifest";
  for (const auto& [name, ids] : manifest) j[name] = ids;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write split manifest '{}'", path));
  out << j.dump() << '\n';
  if (!out) throw ValidationError(fmt::format("short write on split manifest '{}'", path));
}

SplitManifest load_split_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open split manifest '{}'", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(fmt::format("{}: invalid split manifest: {}", path, e.what()));
  }
  if (!j.is_object() || j.value("kind", "") != "deers-split-manifest")
    throw ValidationError(fmt::format("{}: not a split manifest", path));
  SplitManifest m;
  for (const auto& [k, v] : j.items()) {
    if (k == "kind") continue;
    m[k] = v.get<std::vector<std::int64_t>>();
  }
  return m;
}

namespace {

const std::vector<std::int64_t>& split_ids(const SplitManifest& manifest,
                                           const std::string& name) {
  auto it = manifest.find(name);
  if (it == manifest.end())
    throw ValidationError(fmt::format("split manifest has no '{}' split", name));
  return it->second;
}

}  // namespace

void verify_disjoint(const SplitManifest& manifest, const std::string& a, const std::string& b) {
  const auto& ids_a = split_ids(manifest, a);
  std::set<std::int64_t> set_a(ids_a.begin(), ids_a.end());
  for (std::int64_t id : split_ids(manifest, b))
    if (set_a.count(id))
      throw ValidationError(
          fmt::format("splits '{}' and '{}' overlap on session {}", a, b, id));
}

void verify_membership(const SplitManifest& manifest, const std::string& split,
                       const std::vector<Session>& sessions) {
  const auto& ids = split_ids(manifest, split);
  std::set<std::int64_t> allowed(ids.begin(), ids.end());
  for (const auto& s : sessions)
    if (!allowed.count(s.session_id))
      throw ValidationError(fmt::format(
          "session {} is not part of the declared '{}' split", s.session_id, split));
}

}  // namespace deers
