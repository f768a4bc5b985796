#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deers/checkpoint.hpp"
#include "deers/qnetwork.hpp"
#include "deers/replay.hpp"

namespace deers {

struct TrainerConfig {
  std::string sessions_path;
  QVariant variant = QVariant::kDeers;
  Hyperparameters hyper;
  RewardMap rewards;
  NetworkDims dims;
  std::size_t batch_size = 32;
  std::size_t target_sync_interval = 1000;  // updates between target refreshes
  int recall_k = 20;
  std::optional<std::size_t> max_sessions;  // absent = all; 0 = none
  std::size_t log_interval = 100;
  std::uint64_t seed = 0;  // drives minibatch sampling; hyper.seed drives init
  std::size_t replay_capacity = 100000;
  double priority_exponent = 0.6;
  double priority_floor = 0.01;
  std::string abort_dump_path = "deers-abort-batch.json";

  void validate() const;
};

// Competitor of the event at time t: an item elsewhere in the session with
// the same category and opposite feedback polarity, at the closest time;
// equidistant candidates resolve to the earlier event.
std::optional<ItemId> find_competitor(const Session& session, std::int64_t t);

// Walks the session chronologically and stores one transition per event: the
// logged item is the off-policy action, the candidate set is recalled from
// the next state's positive window (plus the logged next action), and the
// final event is terminal. Events with items missing from the catalog are
// dropped and counted.
void replay_session(const Session& session, const Catalog& catalog, ReplayMemory& memory,
                    const TrainerConfig& config, std::size_t* dropped_events = nullptr);

struct MetricsRow {
  std::size_t update_index = 0;
  double mean_loss = 0.0;
  double mean_td_error = 0.0;  // mean |y - Q|
};

struct TrainResult {
  NetworkParameters params;
  std::vector<MetricsRow> trace;
  std::size_t updates = 0;
  std::size_t sessions_consumed = 0;
  std::size_t dropped_events = 0;
};

// Off-policy training: per session, replay it into memory, then run one
// prioritized-minibatch SGD step per stored event against a target network
// refreshed every target_sync_interval updates. Deterministic given seeds.
TrainResult train(const TrainerConfig& config, const std::vector<Session>& sessions,
                  const Catalog& catalog);
TrainResult train(const TrainerConfig& config, const Catalog& catalog);

// Deep copy; later updates to the evaluation network leave the copy intact.
NetworkParameters sync_target(const NetworkParameters& evaluation);

void write_metrics_csv(const std::vector<MetricsRow>& trace, const std::string& path);

}  // namespace deers
