#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deers/metrics.hpp"
#include "deers/qnetwork.hpp"
#include "deers/simulator.hpp"

namespace deers {

struct OfflineReport {
  struct Row {
    std::int64_t session_id = 0;
    double ap = 0.0;
    double ndcg40 = 0.0;
  };
  std::vector<Row> rows;  // evaluable sessions only
  double map = 0.0;
  double mean_ndcg40 = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;  // sessions without positive feedback
};

// Greedy within-session rerank: score every remaining session item at the
// current state, emit the argmax (ties to the smaller item id), reveal its
// logged reward, update the state, repeat. Output permutes the session items.
std::vector<ItemId> rerank_session(const Session& session, const NetworkParameters& params,
                                   QVariant variant, const Catalog& catalog,
                                   const RewardMap& rewards);

OfflineReport offline_evaluate(const std::vector<Session>& sessions,
                               const NetworkParameters& params, QVariant variant,
                               const Catalog& catalog, const RewardMap& rewards);

struct OnlineEvalConfig {
  std::size_t session_length = 100;  // T
  std::size_t sessions = 30;         // M
  int recall_k = 20;
  SimMode mode = SimMode::kArgmax;
  std::uint64_t seed = 0;
};

struct OnlineReport {
  std::vector<double> session_rewards;  // accumulated reward per session
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t session_length = 0;
};

// Simulator rollouts: the policy greedily follows the Q-network over recalled
// candidates; the simulator answers with feedback and reward. Deterministic
// in the seed (per-session and per-step seeds are derived).
OnlineReport online_evaluate(const NetworkParameters& params, QVariant variant,
                             const SimulatorModel& simulator, const Catalog& catalog,
                             const RewardMap& rewards, const OnlineEvalConfig& config);

void write_offline_report_csv(const OfflineReport& report, const std::string& path);
void write_online_report_csv(const OnlineReport& report, const std::string& path);

}  // namespace deers
