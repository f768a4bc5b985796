#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "deers/session.hpp"

namespace deers {

// session_id lists per split name ("train", "sim", "eval").
using SplitManifest = std::map<std::string, std::vector<std::int64_t>>;

// Temporal split: the leading train_fraction of sessions trains the
// Q-network, the simulator trains on a carve-out of the remainder, and the
// rest is the evaluation set.
struct SplitFractions {
  double train = 0.7;
  double sim = 0.15;  // carved from the non-train side

  void validate() const;
};

std::map<std::string, std::vector<Session>> split_sessions(const std::vector<Session>& sessions,
                                                           const SplitFractions& fractions);

void write_split_manifest(const SplitManifest& manifest, const std::string& path);
SplitManifest load_split_manifest(const std::string& path);

// Hard error if the named splits share any session id, or if the given
// sessions stray outside their declared split.
void verify_disjoint(const SplitManifest& manifest, const std::string& a, const std::string& b);
void verify_membership(const SplitManifest& manifest, const std::string& split,
                       const std::vector<Session>& sessions);

}  // namespace deers
