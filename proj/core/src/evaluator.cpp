#include "deers/evaluator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "deers/log.hpp"

namespace deers {

std::vector<ItemId> rerank_session(const Session& session, const NetworkParameters& params,
                                   QVariant variant, const Catalog& catalog,
                                   const RewardMap& rewards) {
  session.validate();
  DualState state = session.initial(static_cast<std::size_t>(params.dims.window));

  std::vector<std::size_t> remaining;  // indices into session.events
  for (std::size_t i = 0; i < session.events.size(); ++i)
    if (catalog.contains(session.events[i].item)) remaining.push_back(i);

  std::vector<ItemId> order;
  order.reserve(remaining.size());
  while (!remaining.empty()) {
    std::vector<ItemId> actions(remaining.size());
    for (std::size_t j = 0; j < remaining.size(); ++j)
      actions[j] = session.events[remaining[j]].item;
    const std::vector<double> scores = q_values(params, variant, state, actions, catalog);

    std::size_t best = 0;
    for (std::size_t j = 1; j < remaining.size(); ++j) {
      if (scores[j] > scores[best] ||
          (scores[j] == scores[best] && actions[j] < actions[best]))
        best = j;
    }
    const auto& event = session.events[remaining[best]];
    const double reward = rewards.reward(event.feedback);  // revealed logged reward
    order.push_back(event.item);
    state = transition(state, event.item, reward);
    remaining.erase(remaining.begin() + best);
  }
  return order;
}

OfflineReport offline_evaluate(const std::vector<Session>& sessions,
                               const NetworkParameters& params, QVariant variant,
                               const Catalog& catalog, const RewardMap& rewards) {
  OfflineReport report;
  for (const auto& session : sessions) {
    bool any_positive = false;
    for (const auto& e : session.events)
      if (e.positive() && catalog.contains(e.item)) any_positive = true;
    if (!any_positive) {
      ++report.excluded;
      continue;
    }
    const std::vector<ItemId> order = rerank_session(session, params, variant, catalog, rewards);

    // rewards revealed in emitted order; duplicates consume events in order
    std::vector<bool> used(session.events.size(), false);
    std::vector<double> ranked;
    ranked.reserve(order.size());
    for (ItemId item : order)
      for (std::size_t i = 0; i < session.events.size(); ++i)
        if (!used[i] && session.events[i].item == item) {
          used[i] = true;
          ranked.push_back(rewards.reward(session.events[i].feedback));
          break;
        }

    OfflineReport::Row row;
    row.session_id = session.session_id;
    row.ap = average_precision(ranked);
    row.ndcg40 = ndcg_at_k(ranked, 40);
    report.map += row.ap;
    report.mean_ndcg40 += row.ndcg40;
    report.rows.push_back(row);
  }
  report.evaluated = report.rows.size();
  if (report.evaluated == 0) throw ValidationError("no evaluable sessions");
  report.map /= static_cast<double>(report.evaluated);
  report.mean_ndcg40 /= static_cast<double>(report.evaluated);
  return report;
}

OnlineReport online_evaluate(const NetworkParameters& params, QVariant variant,
                             const SimulatorModel& simulator, const Catalog& catalog,
                             const RewardMap& rewards, const OnlineEvalConfig& config) {
  if (config.session_length < 1 || config.sessions < 1)
    throw ConfigError("online evaluation needs T >= 1 and M >= 1");
  if (simulator.params.dims.window != params.dims.window)
    throw ConfigError(fmt::format("simulator window {} != policy window {}",
                                  simulator.params.dims.window, params.dims.window));
  rewards.validate();

  std::vector<ItemId> all_items;
  all_items.reserve(catalog.size());
  for (const auto& item : catalog.items()) all_items.push_back(item.id);

  OnlineReport report;
  report.session_length = config.session_length;
  report.session_rewards.reserve(config.sessions);

  std::vector<ItemId> history;
  for (std::size_t m = 0; m < config.sessions; ++m) {
    const std::uint64_t session_seed = derive_seed(config.seed, m);
    DualState state = DualState::padded(static_cast<std::size_t>(params.dims.window));
    double total = 0.0;
    for (std::size_t t = 0; t < config.session_length; ++t) {
      history.clear();
      for (ItemId id : state.positive)
        if (id != kPaddingId) history.push_back(id);
      std::set<ItemId> candidates = recall_candidates(catalog, history, config.recall_k);

      ItemId action = kPaddingId;
      double best = 0.0;
      if (candidates.empty()) {
        // cold start falls back to the full catalog
        const std::vector<double> scores = q_values(params, variant, state, all_items, catalog);
        std::size_t bi = 0;
        for (std::size_t j = 1; j < all_items.size(); ++j)
          if (scores[j] > scores[bi]) bi = j;  // items ascend by id: ties keep the smaller
        action = all_items[bi];
        best = scores[bi];
      } else {
        const std::vector<ItemId> actions(candidates.begin(), candidates.end());
        const std::vector<double> scores = q_values(params, variant, state, actions, catalog);
        std::size_t bi = 0;
        for (std::size_t j = 1; j < actions.size(); ++j)
          if (scores[j] > scores[bi]) bi = j;
        action = actions[bi];
        best = scores[bi];
      }
      (void)best;

      const auto [feedback, reward] =
          simulate_feedback(simulator, state, action, catalog, rewards, config.mode,
                            derive_seed(session_seed, t));
      total += reward;
      state = transition(state, action, reward);
    }
    report.session_rewards.push_back(total);
  }

  double mean = 0.0;
  for (double r : report.session_rewards) mean += r;
  mean /= static_cast<double>(report.session_rewards.size());
  double var = 0.0;
  for (double r : report.session_rewards) var += (r - mean) * (r - mean);
  report.mean = mean;
  report.stddev = report.session_rewards.size() > 1
                      ? std::sqrt(var / static_cast<double>(report.session_rewards.size() - 1))
                      : 0.0;
  return report;
}

void write_offline_report_csv(const OfflineReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write report '{}'", path));
  out << "session_id,ap,ndcg40\n";
  for (const auto& row : report.rows)
    out << fmt::format("{},{:.17g},{:.17g}\n", row.session_id, row.ap, row.ndcg40);
  out << fmt::format("# map={:.17g} ndcg40={:.17g} evaluated={} excluded={}\n", report.map,
                     report.mean_ndcg40, report.evaluated, report.excluded);
}

void write_online_report_csv(const OnlineReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write report '{}'", path));
  out << "session,accumulated_reward\n";
  for (std::size_t i = 0; i < report.session_rewards.size(); ++i)
    out << fmt::format("{},{:.17g}\n", i, report.session_rewards[i]);
  out << fmt::format("# mean={:.17g} stddev={:.17g} T={}\n", report.mean, report.stddev,
                     report.session_length);
}

}  // namespace deers
