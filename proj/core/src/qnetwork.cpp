#include "deers/qnetwork.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace deers {

void Hyperparameters::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(gradient_clip > 0.0)) throw ConfigError("gradient clip must be positive");
}

double q_value(const NetworkParameters& params, QVariant variant, const DualState& state,
               ItemId action, const Catalog& catalog) {
  if (!catalog.contains(action))
    throw ValidationError(fmt::format("q_value: unknown action item {}", action));
  const StateEncoding enc = encode_state(params, variant, state, catalog, false);
  return trunk_forward(params, variant, enc, catalog.embedding(action), nullptr)(0);
}

std::vector<double> q_values(const NetworkParameters& params, QVariant variant,
                             const DualState& state, std::span<const ItemId> actions,
                             const Catalog& catalog) {
  if (actions.empty()) return {};
  const StateEncoding enc = encode_state(params, variant, state, catalog, false);
  Eigen::MatrixXd embeds(params.dims.embed_dim, static_cast<Eigen::Index>(actions.size()));
  for (std::size_t j = 0; j < actions.size(); ++j) {
    if (!catalog.contains(actions[j]))
      throw ValidationError(fmt::format("q_value: unknown action item {}", actions[j]));
    embeds.col(static_cast<Eigen::Index>(j)) = catalog.embedding(actions[j]);
  }
  const Eigen::MatrixXd out = trunk_forward_many(params, variant, enc, embeds);
  std::vector<double> values(actions.size());
  for (std::size_t j = 0; j < actions.size(); ++j)
    values[j] = out(0, static_cast<Eigen::Index>(j));
  return values;
}

double td_target(double reward, const DualState& next_state, const std::set<ItemId>& candidates,
                 const NetworkParameters& target_params, QVariant variant,
                 const Catalog& catalog, double gamma, bool terminal) {
  if (terminal) return reward;
  if (candidates.empty())
    throw ValidationError("td_target: empty candidate set on a non-terminal transition");
  const std::vector<ItemId> actions(candidates.begin(), candidates.end());
  const std::vector<double> values = q_values(target_params, variant, next_state, actions, catalog);
  double best = -std::numeric_limits<double>::infinity();
  for (double v : values) best = std::max(best, v);
  return reward + gamma * best;
}

LossGradient loss_and_gradient(const NetworkParameters& params, QVariant variant,
                               const std::vector<std::pair<Transition, double>>& batch,
                               double alpha, const Catalog& catalog) {
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
  if (batch.empty()) throw ValidationError("loss_and_gradient: empty batch");

  LossGradient result;
  result.gradient = zeros_like(params);
  result.td_errors.reserve(batch.size());
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const int enc_width = params.dims.encoding_width(variant);

  double loss = 0.0;
  for (const auto& [t, y] : batch) {
    StateEncoding enc = encode_state(params, variant, t.state, catalog, true);

    TrunkTrace trace_a;
    const double q_a = trunk_forward(params, variant, enc, catalog.embedding(t.action),
                                     &trace_a)(0);
    result.td_errors.push_back(y - q_a);

    const bool use_competitor = alpha > 0.0 && t.competitor.has_value();
    double q_c = 0.0;
    TrunkTrace trace_c;
    if (use_competitor)
      q_c = trunk_forward(params, variant, enc, catalog.embedding(*t.competitor), &trace_c)(0);

    loss += inv_b * (y - q_a) * (y - q_a);
    double dq_a = inv_b * -2.0 * (y - q_a);
    if (use_competitor) {
      loss -= inv_b * alpha * (q_a - q_c) * (q_a - q_c);
      dq_a += inv_b * -2.0 * alpha * (q_a - q_c);
    }

    Eigen::VectorXd d_enc_pos = Eigen::VectorXd::Zero(enc_width);
    Eigen::VectorXd d_enc_neg = Eigen::VectorXd::Zero(enc_width);
    trunk_backward(params, variant, trace_a, Eigen::VectorXd::Constant(1, dq_a), result.gradient,
                   d_enc_pos, d_enc_neg);
    if (use_competitor) {
      const double dq_c = inv_b * 2.0 * alpha * (q_a - q_c);
      trunk_backward(params, variant, trace_c, Eigen::VectorXd::Constant(1, dq_c),
                     result.gradient, d_enc_pos, d_enc_neg);
    }
    encoder_backward(params, variant, enc, d_enc_pos, d_enc_neg, result.gradient);
  }
  result.loss = loss;
  return result;
}

void apply_update(NetworkParameters& params, const NetworkParameters& gradient,
                  double learning_rate, double gradient_clip) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(gradient_clip > 0.0)) throw ConfigError("gradient clip must be positive");
  if (!all_finite(gradient))
    throw TrainingAbort("apply_update: non-finite gradient entry; aborting training");
  const double norm = global_norm(gradient);
  const double scale = norm > gradient_clip ? gradient_clip / norm : 1.0;
  axpy(params, -learning_rate * scale, gradient);
}

}  // namespace deers
