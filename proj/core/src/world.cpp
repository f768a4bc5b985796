#include "deers/world.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <deque>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "deers/log.hpp"

namespace deers {

void WorldConfig::validate() const {
  if (items < 2 || categories < 1 || latent_dim < 1)
    throw ConfigError("world: items >= 2, categories >= 1, latent_dim >= 1 required");
  if (categories > items) throw ConfigError("world: more categories than items");
  if (item_noise < 0.0 || boredom < 0.0 || repeat_penalty < 0.0 || temperature < 0.0)
    throw ConfigError("world: noise and penalty parameters must be >= 0");
  if (!(order_threshold > click_threshold))
    throw ConfigError("world: order_threshold must exceed click_threshold");
  if (explore_rate < 0.0 || explore_rate > 1.0)
    throw ConfigError("world: explore_rate must lie in [0, 1]");
  if (policy_top_m < 1 || recent_window < 1)
    throw ConfigError("world: policy_top_m and recent_window must be >= 1");
}

namespace {

Eigen::VectorXd random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = n01(rng);
  const double norm = v.norm();
  return norm > 0.0 ? Eigen::VectorXd(v / norm) : random_unit(dim, rng);
}

}  // namespace

SyntheticWorld make_world(const WorldConfig& config) {
  config.validate();
  SyntheticWorld world;
  world.config = config;
  std::mt19937_64 rng(derive_seed(config.seed, 0xc47u));
  std::normal_distribution<double> n01(0.0, 1.0);

  std::vector<Eigen::VectorXd> centroids;
  centroids.reserve(config.categories);
  for (int c = 0; c < config.categories; ++c)
    centroids.push_back(random_unit(config.latent_dim, rng));

  world.item_latents.resize(config.items + 1);
  world.item_categories.resize(config.items + 1, 0);
  for (int i = 1; i <= config.items; ++i) {
    const int cat = (i - 1) % config.categories;
    Eigen::VectorXd v = centroids[cat];
    for (int d = 0; d < config.latent_dim; ++d) v(d) += config.item_noise * n01(rng);
    world.item_latents[i] = v / v.norm();
    world.item_categories[i] = cat;
  }
  return world;
}

double affinity_score(const SyntheticWorld& world, const Eigen::VectorXd& user_latent,
                      ItemId item, std::span<const SessionEvent> recent_events) {
  const auto& cfg = world.config;
  const CategoryId cat = world.category_of(item);
  int category_skips = 0;
  int repeats = 0;
  for (const auto& e : recent_events) {
    if (e.category == cat && e.feedback == Feedback::kSkip) ++category_skips;
    if (e.item == item) ++repeats;
  }
  return user_latent.dot(world.item_latents[static_cast<std::size_t>(item)]) -
         cfg.boredom * category_skips - cfg.repeat_penalty * repeats;
}

Feedback threshold_feedback(const WorldConfig& config, double score) {
  if (score > config.order_threshold) return Feedback::kOrder;
  if (score > config.click_threshold) return Feedback::kClick;
  return Feedback::kSkip;
}

GeneratedLog generate_world(const SyntheticWorld& world,
                            const std::vector<Eigen::VectorXd>& user_latents,
                            int sessions_per_user, int session_length) {
  world.config.validate();
  if (user_latents.empty() || sessions_per_user < 1 || session_length < 1)
    throw ConfigError("generate_world: users, sessions_per_user and session_length must be positive");
  const auto& cfg = world.config;

  GeneratedLog out;
  out.user_latents = user_latents;
  std::array<std::size_t, kFeedbackClasses> class_counts{};

  for (std::size_t user = 0; user < user_latents.size(); ++user) {
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x9000u + user));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<ItemId> uniform_item(1, cfg.items);
    std::normal_distribution<double> n01(0.0, 1.0);
    const Eigen::VectorXd& u = user_latents[user];

    // static preference ranking for the logging policy's greedy arm
    std::vector<ItemId> top(cfg.items);
    std::iota(top.begin(), top.end(), ItemId{1});
    std::sort(top.begin(), top.end(), [&](ItemId a, ItemId b) {
      const double sa = u.dot(world.item_latents[static_cast<std::size_t>(a)]);
      const double sb = u.dot(world.item_latents[static_cast<std::size_t>(b)]);
      if (sa != sb) return sa > sb;
      return a < b;
    });
    const int top_m = std::min<int>(cfg.policy_top_m, cfg.items);
    std::uniform_int_distribution<int> top_pick(0, top_m - 1);

    for (int s = 0; s < sessions_per_user; ++s) {
      Session session;
      session.session_id = static_cast<std::int64_t>(user) * sessions_per_user + s + 1;
      std::deque<SessionEvent> recent;
      for (int t = 0; t < session_length; ++t) {
        const ItemId item =
            u01(rng) < cfg.explore_rate ? uniform_item(rng) : top[top_pick(rng)];
        const std::vector<SessionEvent> recent_vec(recent.begin(), recent.end());
        double score = affinity_score(world, u, item, recent_vec);
        if (cfg.temperature > 0.0) score += cfg.temperature * n01(rng);
        const Feedback feedback = threshold_feedback(cfg, score);
        ++class_counts[static_cast<int>(feedback)];

        SessionEvent event;
        event.time_index = t + 1;
        event.item = item;
        event.category = world.category_of(item);
        event.feedback = feedback;
        session.events.push_back(event);
        recent.push_back(event);
        if (static_cast<int>(recent.size()) > cfg.recent_window) recent.pop_front();
      }
      out.sessions.push_back(std::move(session));
    }
  }

  const std::size_t total =
      std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0});
  for (int c = 0; c < kFeedbackClasses; ++c) {
    const double share = static_cast<double>(class_counts[c]) / static_cast<double>(total);
    if (share < 0.01)
      throw ValidationError(fmt::format(
          "generated world is degenerate: class '{}' is {:.2%} of events; adjust thresholds, "
          "temperature or penalties and regenerate",
          to_string(static_cast<Feedback>(c)), share));
  }
  log_info("generated {} sessions, {} events (skip/click/order = {}/{}/{})", out.sessions.size(),
           total, class_counts[0], class_counts[1], class_counts[2]);
  return out;
}

GeneratedLog generate_world(const SyntheticWorld& world, int users, int sessions_per_user,
                            int session_length) {
  if (users < 1) throw ConfigError("generate_world: users must be positive");
  std::vector<Eigen::VectorXd> latents;
  latents.reserve(users);
  for (int user = 0; user < users; ++user) {
    std::mt19937_64 rng(derive_seed(world.config.seed, 0x7000u + user));
    latents.push_back(random_unit(world.config.latent_dim, rng));
  }
  return generate_world(world, latents, sessions_per_user, session_length);
}

void write_latents(const SyntheticWorld& world, const std::vector<Eigen::VectorXd>& user_latents,
                   const std::string& path) {
  nlohmann::ordered_json j;
  j["kind"] = "deers-world-latents";
  j["latent_dim"] = world.config.latent_dim;
  auto& items = j["items"] = nlohmann::ordered_json::array();
  for (std::size_t i = 1; i < world.item_latents.size(); ++i) {
    nlohmann::ordered_json ji;
    ji["id"] = i;
    ji["category"] = world.item_categories[i];
    ji["latent"] = std::vector<double>(world.item_latents[i].data(),
                                       world.item_latents[i].data() + world.item_latents[i].size());
    items.push_back(std::move(ji));
  }
  auto& users = j["users"] = nlohmann::ordered_json::array();
  for (const auto& u : user_latents)
    users.push_back(std::vector<double>(u.data(), u.data() + u.size()));
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write latents '{}'", path));
  out << j.dump() << '\n';  // single line: session-log readers key off "kind"
  if (!out) throw ValidationError(fmt::format("short write on latents '{}'", path));
}

}  // namespace deers
