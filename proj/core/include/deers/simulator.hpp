#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "deers/network.hpp"
#include "deers/types.hpp"

namespace deers {

// Learned feedback simulator: the dual-stream body with a 3-way softmax head
// over (skip, click, order), trained on logs held out from Q-network training.
struct SimulatorModel {
  NetworkParameters params;  // output_dim == 3
};

// Softmax class probabilities in fixed (skip, click, order) order.
Eigen::Vector3d feedback_probabilities(const SimulatorModel& model, const DualState& state,
                                       ItemId action, const Catalog& catalog);

enum class SimMode { kArgmax, kSample };

// Argmax mode resolves ties by class precedence skip < click < order; sample
// mode draws from the softmax distribution, deterministic in seed.
std::pair<Feedback, double> simulate_feedback(const SimulatorModel& model,
                                              const DualState& state, ItemId action,
                                              const Catalog& catalog, const RewardMap& rewards,
                                              SimMode mode, std::uint64_t seed);

struct SimulatorTrainConfig {
  NetworkDims dims;  // output_dim is forced to 3
  int epochs = 3;
  double learning_rate = 0.01;
  double gradient_clip = 5.0;
  double heldout_fraction = 0.2;  // trailing sessions reserved for precision
  std::uint64_t seed = 0;
  RewardMap rewards;

  void validate() const;
};

struct SimulatorTrainResult {
  SimulatorModel model;
  double heldout_accuracy = 0.0;      // micro accuracy of the argmax prediction
  double majority_baseline = 0.0;     // heldout frequency of the train-majority class
  std::array<double, kFeedbackClasses> per_class_precision{};
  std::size_t train_samples = 0;
  std::size_t heldout_samples = 0;
};

// Cross-entropy SGD over (state, action, feedback) samples walked from the
// given sessions; the trailing heldout_fraction of sessions is kept for the
// precision report. Split disjointness from the Q-network's training data is
// the caller's responsibility (see splits.hpp).
SimulatorTrainResult train_simulator(const std::vector<Session>& sessions,
                                     const Catalog& catalog,
                                     const SimulatorTrainConfig& config);

}  // namespace deers
