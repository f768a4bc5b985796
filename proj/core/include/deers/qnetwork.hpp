#pragma once

#include <set>
#include <span>
#include <utility>
#include <vector>

#include "deers/network.hpp"
#include "deers/replay.hpp"

namespace deers {

struct Hyperparameters {
  double gamma = 0.95;         // discount
  double alpha = 0.1;          // pairwise regularizer weight
  double learning_rate = 0.01;
  double gradient_clip = 5.0;  // global norm
  std::uint64_t seed = 0;

  void validate() const;
};

double q_value(const NetworkParameters& params, QVariant variant, const DualState& state,
               ItemId action, const Catalog& catalog);

// Scores many actions at one state, sharing the window encodings.
std::vector<double> q_values(const NetworkParameters& params, QVariant variant,
                             const DualState& state, std::span<const ItemId> actions,
                             const Catalog& catalog);

// y = r for terminal transitions, else r + gamma * max over candidates of the
// target network's Q at next_state.
double td_target(double reward, const DualState& next_state, const std::set<ItemId>& candidates,
                 const NetworkParameters& target_params, QVariant variant,
                 const Catalog& catalog, double gamma, bool terminal);

struct LossGradient {
  double loss = 0.0;
  NetworkParameters gradient;
  std::vector<double> td_errors;  // y - Q(s, a), one per batch entry
};

// Mean over the batch of
//   (y - Q(s+, s-, a))^2 - alpha * (Q(s+, s-, a) - Q(s+, s-, a^C))^2
// where the second term is present only for transitions carrying a
// competitor. The gradient is the exact derivative of that loss with respect
// to every parameter, end to end through the window encoders; y is constant.
LossGradient loss_and_gradient(const NetworkParameters& params, QVariant variant,
                               const std::vector<std::pair<Transition, double>>& batch,
                               double alpha, const Catalog& catalog);

// Global-norm clipping, then theta <- theta - lr * g, in place.
void apply_update(NetworkParameters& params, const NetworkParameters& gradient,
                  double learning_rate, double gradient_clip);

}  // namespace deers
