#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "deers/session.hpp"
#include "deers/types.hpp"

namespace deers {

// One replayable step of a logged session. candidates is the recalled action
// space at next_state, used for the TD target's max.
struct Transition {
  DualState state;
  ItemId action = kPaddingId;
  double reward = 0.0;
  DualState next_state;
  std::optional<ItemId> competitor;
  bool terminal = false;
  std::set<ItemId> candidates;
  double priority = 1.0;
};

// FIFO ring with proportional prioritized sampling:
//   p_i = (priority_i + floor)^exponent / sum_j (priority_j + floor)^exponent
// Single-writer; the training loop owns the memory.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity, double priority_exponent = 0.6,
                        double priority_floor = 0.01);

  // Stores with priority = max priority currently in memory (1 if empty) so
  // fresh experience is likely to be sampled soon. Evicts oldest when full.
  void push(Transition t);

  // batch_size indices drawn with replacement. Indices are storage slots,
  // valid until the next push.
  std::vector<std::size_t> sample(std::size_t batch_size, std::mt19937_64& rng) const;
  std::vector<std::size_t> sample(std::size_t batch_size, std::uint64_t seed) const;

  // priority_i <- |td_error_i|; the floor is applied at sampling time only.
  void update_priorities(std::span<const std::size_t> indices,
                         std::span<const double> td_errors);

  const Transition& at(std::size_t index) const;
  std::size_t size() const { return ring_.size(); }
  std::size_t capacity() const { return capacity_; }
  double priority_exponent() const { return exponent_; }
  double priority_floor() const { return floor_; }

  // Closed-form p_i over stored transitions.
  std::vector<double> sampling_probabilities() const;

 private:
  double max_priority() const;

  std::size_t capacity_;
  double exponent_;
  double floor_;
  std::vector<Transition> ring_;
  std::size_t next_ = 0;  // insertion slot once full
  std::multiset<double> priorities_;
};

}  // namespace deers
