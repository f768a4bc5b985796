#include "deers/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "deers/log.hpp"

namespace deers {

namespace {

Eigen::Vector3d softmax3(const Eigen::VectorXd& logits) {
  if (logits.size() != kFeedbackClasses)
    throw ConfigError(
        fmt::format("simulator head produced {} outputs, expected 3", logits.size()));
  const double m = logits.maxCoeff();
  Eigen::Vector3d e = (logits.array() - m).exp();
  return e / e.sum();
}

}  // namespace

Eigen::Vector3d feedback_probabilities(const SimulatorModel& model, const DualState& state,
                                       ItemId action, const Catalog& catalog) {
  const StateEncoding enc =
      encode_state(model.params, QVariant::kDeers, state, catalog, false);
  return softmax3(
      trunk_forward(model.params, QVariant::kDeers, enc, catalog.embedding(action), nullptr));
}

std::pair<Feedback, double> simulate_feedback(const SimulatorModel& model,
                                              const DualState& state, ItemId action,
                                              const Catalog& catalog, const RewardMap& rewards,
                                              SimMode mode, std::uint64_t seed) {
  const Eigen::Vector3d p = feedback_probabilities(model, state, action, catalog);
  int cls = 0;
  if (mode == SimMode::kArgmax) {
    for (int c = 1; c < kFeedbackClasses; ++c)
      if (p(c) > p(cls)) cls = c;  // strict: ties keep skip < click < order precedence
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double u = u01(rng);
    double acc = 0.0;
    cls = kFeedbackClasses - 1;
    for (int c = 0; c < kFeedbackClasses; ++c) {
      acc += p(c);
      if (u < acc) {
        cls = c;
        break;
      }
    }
  }
  const auto feedback = static_cast<Feedback>(cls);
  return {feedback, rewards.reward(feedback)};
}

void SimulatorTrainConfig::validate() const {
  dims.validate();
  rewards.validate();
  if (epochs < 1) throw ConfigError("simulator epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(gradient_clip > 0.0)) throw ConfigError("gradient clip must be positive");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0))
    throw ConfigError("heldout fraction must lie in (0, 1)");
}

namespace {

struct Sample {
  DualState state;
  ItemId action;
  int label;
};

std::vector<Sample> collect_samples(const std::vector<Session>& sessions,
                                    const Catalog& catalog, const RewardMap& rewards,
                                    int window) {
  std::vector<Sample> out;
  for (const auto& session : sessions) {
    session.validate();
    DualState state = session.initial(static_cast<std::size_t>(window));
    for (const auto& event : session.events) {
      if (!catalog.contains(event.item)) continue;
      out.push_back(Sample{state, event.item, static_cast<int>(event.feedback)});
      state = transition(state, event.item, rewards.reward(event.feedback));
    }
  }
  return out;
}

}  // namespace

SimulatorTrainResult train_simulator(const std::vector<Session>& sessions,
                                     const Catalog& catalog,
                                     const SimulatorTrainConfig& config) {
  config.validate();
  if (sessions.size() < 2)
    throw ValidationError("simulator training needs at least 2 sessions");
  if (config.dims.embed_dim != catalog.dim())
    throw ConfigError(fmt::format("network embed_dim {} != catalog dim {}",
                                  config.dims.embed_dim, catalog.dim()));

  NetworkDims dims = config.dims;
  dims.output_dim = kFeedbackClasses;

  const auto heldout_sessions = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.heldout_fraction *
                                               static_cast<double>(sessions.size()))));
  const std::size_t train_sessions = sessions.size() - heldout_sessions;
  if (train_sessions == 0) throw ValidationError("heldout fraction leaves no training sessions");

  const std::vector<Session> train_split(sessions.begin(), sessions.begin() + train_sessions);
  const std::vector<Session> heldout_split(sessions.begin() + train_sessions, sessions.end());

  auto train_samples = collect_samples(train_split, catalog, config.rewards, dims.window);
  const auto heldout_samples = collect_samples(heldout_split, catalog, config.rewards, dims.window);
  if (train_samples.empty() || heldout_samples.empty())
    throw ValidationError("simulator training produced an empty sample split");

  SimulatorTrainResult result;
  result.train_samples = train_samples.size();
  result.heldout_samples = heldout_samples.size();
  result.model.params = init_network(QVariant::kDeers, dims, derive_seed(config.seed, 0x51u));

  std::mt19937_64 shuffle_rng(derive_seed(config.seed, 0x52u));
  std::vector<std::size_t> order(train_samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const int enc_width = dims.encoding_width(QVariant::kDeers);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double ce = 0.0;
    for (std::size_t idx : order) {
      const Sample& s = train_samples[idx];
      StateEncoding enc =
          encode_state(result.model.params, QVariant::kDeers, s.state, catalog, true);
      TrunkTrace trace;
      const Eigen::VectorXd logits = trunk_forward(result.model.params, QVariant::kDeers, enc,
                                                   catalog.embedding(s.action), &trace);
      const Eigen::Vector3d p = softmax3(logits);
      ce += -std::log(std::max(p(s.label), 1e-300));

      Eigen::VectorXd dlogits = p;
      dlogits(s.label) -= 1.0;

      NetworkParameters grad = zeros_like(result.model.params);
      Eigen::VectorXd d_enc_pos = Eigen::VectorXd::Zero(enc_width);
      Eigen::VectorXd d_enc_neg = Eigen::VectorXd::Zero(enc_width);
      trunk_backward(result.model.params, QVariant::kDeers, trace, dlogits, grad, d_enc_pos,
                     d_enc_neg);
      encoder_backward(result.model.params, QVariant::kDeers, enc, d_enc_pos, d_enc_neg, grad);
      apply_update(result.model.params, grad, config.learning_rate, config.gradient_clip);
    }
    log_info("simulator epoch {}: mean cross-entropy {:.4f}", epoch + 1,
             ce / train_samples.size());
  }

  // majority class measured on the training split
  std::array<std::size_t, kFeedbackClasses> train_counts{};
  for (const auto& s : train_samples) ++train_counts[s.label];
  const int majority = static_cast<int>(
      std::max_element(train_counts.begin(), train_counts.end()) - train_counts.begin());

  std::array<std::size_t, kFeedbackClasses> predicted{}, correct{};
  std::size_t hits = 0, majority_hits = 0;
  for (const auto& s : heldout_samples) {
    const Eigen::Vector3d p =
        feedback_probabilities(result.model, s.state, s.action, catalog);
    int cls = 0;
    for (int c = 1; c < kFeedbackClasses; ++c)
      if (p(c) > p(cls)) cls = c;
    ++predicted[cls];
    if (cls == s.label) {
      ++correct[cls];
      ++hits;
    }
    if (s.label == majority) ++majority_hits;
  }
  result.heldout_accuracy = static_cast<double>(hits) / heldout_samples.size();
  result.majority_baseline = static_cast<double>(majority_hits) / heldout_samples.size();
  for (int c = 0; c < kFeedbackClasses; ++c)
    result.per_class_precision[c] =
        predicted[c] == 0 ? 0.0 : static_cast<double>(correct[c]) / predicted[c];
  return result;
}

}  // namespace deers
