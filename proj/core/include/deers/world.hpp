#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deers/session.hpp"
#include "deers/types.hpp"

namespace deers {

// Ground-truth dynamics for the synthetic world. The affinity of user u for
// item a is u . e_a minus a boredom penalty per recent same-category skip and
// a repetition penalty per recent occurrence of a itself, plus Gaussian noise
// scaled by temperature. Feedback falls out of the two thresholds.
struct WorldConfig {
  int items = 200;
  int categories = 10;
  int latent_dim = 8;
  double item_noise = 0.3;        // spread of items around their category centroid
  double boredom = 0.25;          // per recent same-category skip
  double repeat_penalty = 0.4;    // per recent occurrence of the same item
  double click_threshold = 0.30;
  double order_threshold = 0.75;
  double temperature = 0.05;
  double explore_rate = 0.2;      // logging policy: uniform-random share
  int policy_top_m = 5;           // preference arm picks among the top-m static items
  int recent_window = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticWorld {
  WorldConfig config;
  std::vector<Eigen::VectorXd> item_latents;   // index 0 unused; ids are 1..items
  std::vector<CategoryId> item_categories;     // same indexing

  CategoryId category_of(ItemId id) const { return item_categories.at(static_cast<std::size_t>(id)); }
};

SyntheticWorld make_world(const WorldConfig& config);

// Noise-free affinity of (user, item) given the recent event history.
double affinity_score(const SyntheticWorld& world, const Eigen::VectorXd& user_latent,
                      ItemId item, std::span<const SessionEvent> recent_events);
Feedback threshold_feedback(const WorldConfig& config, double score);

struct GeneratedLog {
  std::vector<Session> sessions;
  std::vector<Eigen::VectorXd> user_latents;
};

// Logs under the mixture logging policy. Deterministic: per-user seeds are
// derived from the world seed and results are merged in user order. Throws if
// any feedback class ends up below 1% of events.
GeneratedLog generate_world(const SyntheticWorld& world, int users, int sessions_per_user,
                            int session_length);
// Same, with caller-provided user latents (one session stream per user).
GeneratedLog generate_world(const SyntheticWorld& world,
                            const std::vector<Eigen::VectorXd>& user_latents,
                            int sessions_per_user, int session_length);

// Ground-truth latents, persisted separately from the logs. Training code
// refuses to read this file.
void write_latents(const SyntheticWorld& world, const std::vector<Eigen::VectorXd>& user_latents,
                   const std::string& path);

}  // namespace deers
