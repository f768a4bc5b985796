#include "deers/trainer.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "deers/log.hpp"

namespace deers {

void TrainerConfig::validate() const {
  hyper.validate();
  rewards.validate();
  dims.validate();
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (target_sync_interval < 1) throw ConfigError("target_sync_interval must be >= 1");
  if (recall_k < 1) throw ConfigError("recall_k must be >= 1");
  if (log_interval < 1) throw ConfigError("log_interval must be >= 1");
}

std::optional<ItemId> find_competitor(const Session& session, std::int64_t t) {
  const SessionEvent* target = nullptr;
  for (const auto& e : session.events)
    if (e.time_index == t) {
      target = &e;
      break;
    }
  if (target == nullptr)
    throw ValidationError(
        fmt::format("find_competitor: session {} has no event at t={}", session.session_id, t));

  const SessionEvent* best = nullptr;
  std::int64_t best_distance = 0;
  for (const auto& e : session.events) {
    if (e.time_index == t) continue;
    if (e.category != target->category) continue;
    if (e.positive() == target->positive()) continue;
    const std::int64_t distance = std::abs(e.time_index - t);
    // strict < keeps the earlier event on equidistant ties (events are in
    // chronological order)
    if (best == nullptr || distance < best_distance) {
      best = &e;
      best_distance = distance;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->item;
}

namespace {

std::vector<ItemId> unpadded(const std::vector<ItemId>& window) {
  std::vector<ItemId> out;
  for (ItemId id : window)
    if (id != kPaddingId) out.push_back(id);
  return out;
}

}  // namespace

void replay_session(const Session& session, const Catalog& catalog, ReplayMemory& memory,
                    const TrainerConfig& config, std::size_t* dropped_events) {
  session.validate();
  DualState state = session.initial(static_cast<std::size_t>(config.dims.window));
  const std::size_t n_events = session.events.size();
  for (std::size_t i = 0; i < n_events; ++i) {
    const auto& event = session.events[i];
    if (!catalog.contains(event.item)) {
      if (dropped_events) ++*dropped_events;
      log_debug("session {}: dropping event t={} with unknown item {}", session.session_id,
                event.time_index, event.item);
      continue;
    }
    Transition t;
    t.state = state;
    t.action = event.item;
    t.reward = config.rewards.reward(event.feedback);
    t.next_state = transition(state, t.action, t.reward);
    t.terminal = (i + 1 == n_events);

    if (auto competitor = find_competitor(session, event.time_index);
        competitor && catalog.contains(*competitor))
      t.competitor = competitor;

    if (!t.terminal) {
      t.candidates = recall_candidates(catalog, unpadded(t.next_state.positive), config.recall_k);
      if (t.candidates.empty())  // cold start: fall back to the full catalog
        for (const auto& item : catalog.items()) t.candidates.insert(item.id);
      if (catalog.contains(session.events[i + 1].item))
        t.candidates.insert(session.events[i + 1].item);
    }

    state = t.next_state;
    memory.push(std::move(t));
  }
}

NetworkParameters sync_target(const NetworkParameters& evaluation) { return evaluation; }

namespace {

void dump_batch(const std::vector<std::pair<Transition, double>>& batch,
                const std::string& path) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [t, y] : batch) {
    nlohmann::json jt;
    jt["state_positive"] = t.state.positive;
    jt["state_negative"] = t.state.negative;
    jt["action"] = t.action;
    jt["reward"] = t.reward;
    jt["terminal"] = t.terminal;
    jt["target_y"] = y;
    if (t.competitor) jt["competitor"] = *t.competitor;
    out.push_back(std::move(jt));
  }
  std::ofstream f(path, std::ios::trunc);
  f << out.dump(2) << '\n';
}

}  // namespace

TrainResult train(const TrainerConfig& config, const std::vector<Session>& sessions,
                  const Catalog& catalog) {
  config.validate();
  if (config.dims.embed_dim != catalog.dim())
    throw ConfigError(fmt::format("network embed_dim {} != catalog dim {}",
                                  config.dims.embed_dim, catalog.dim()));
  if (config.dims.output_dim != 1) throw ConfigError("q-network output_dim must be 1");

  TrainResult result;
  result.params = init_network(config.variant, config.dims, config.hyper.seed);
  NetworkParameters target = sync_target(result.params);
  // deers-r is deers with the regularizer disabled
  const double alpha = config.variant == QVariant::kDeersR ? 0.0 : config.hyper.alpha;

  ReplayMemory memory(config.replay_capacity, config.priority_exponent, config.priority_floor);
  std::mt19937_64 sample_rng(derive_seed(config.seed, 0x5a17u));

  const std::size_t session_limit =
      config.max_sessions.value_or(sessions.size());

  double interval_loss = 0.0;
  double interval_td = 0.0;
  std::size_t interval_n = 0;
  auto flush_interval = [&](std::size_t update_index) {
    if (interval_n == 0) return;
    result.trace.push_back(MetricsRow{update_index, interval_loss / interval_n,
                                      interval_td / interval_n});
    interval_loss = interval_td = 0.0;
    interval_n = 0;
  };

  for (const auto& session : sessions) {
    if (result.sessions_consumed >= session_limit) break;
    ++result.sessions_consumed;
    const std::size_t dropped_before = result.dropped_events;
    replay_session(session, catalog, memory, config, &result.dropped_events);
    const std::size_t steps =
        session.events.size() - (result.dropped_events - dropped_before);
    if (memory.size() == 0) continue;

    for (std::size_t s = 0; s < steps; ++s) {
      const auto indices = memory.sample(config.batch_size, sample_rng);
      std::vector<std::pair<Transition, double>> batch;
      batch.reserve(indices.size());
      for (std::size_t idx : indices) {
        const Transition& t = memory.at(idx);
        const double y = td_target(t.reward, t.next_state, t.candidates, target, config.variant,
                                   catalog, config.hyper.gamma, t.terminal);
        batch.emplace_back(t, y);
      }
      LossGradient lg = loss_and_gradient(result.params, config.variant, batch, alpha, catalog);
      if (!std::isfinite(lg.loss)) {
        dump_batch(batch, config.abort_dump_path);
        throw TrainingAbort(fmt::format(
            "non-finite loss {} at update {}; offending batch dumped to '{}'", lg.loss,
            result.updates + 1, config.abort_dump_path));
      }
      try {
        apply_update(result.params, lg.gradient, config.hyper.learning_rate,
                     config.hyper.gradient_clip);
      } catch (const TrainingAbort&) {
        dump_batch(batch, config.abort_dump_path);
        throw;
      }
      memory.update_priorities(indices, lg.td_errors);
      ++result.updates;

      interval_loss += lg.loss;
      double batch_td = 0.0;
      for (double e : lg.td_errors) batch_td += std::abs(e);
      interval_td += batch_td / lg.td_errors.size();
      ++interval_n;
      if (result.updates % config.log_interval == 0) flush_interval(result.updates);
      if (result.updates % config.target_sync_interval == 0) target = sync_target(result.params);
    }
  }
  flush_interval(result.updates);
  log_info("trained {} updates over {} sessions ({} events dropped)", result.updates,
           result.sessions_consumed, result.dropped_events);
  return result;
}

TrainResult train(const TrainerConfig& config, const Catalog& catalog) {
  return train(config, read_sessions_jsonl(config.sessions_path), catalog);
}

void write_metrics_csv(const std::vector<MetricsRow>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write metrics '{}'", path));
  out << "update_index,mean_loss,mean_td_error\n";
  for (const auto& row : trace)
    out << fmt::format("{},{:.17g},{:.17g}\n", row.update_index, row.mean_loss,
                       row.mean_td_error);
}

}  // namespace deers
