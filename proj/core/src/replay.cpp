#include "deers/replay.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace deers {

ReplayMemory::ReplayMemory(std::size_t capacity, double priority_exponent, double priority_floor)
    : capacity_(capacity), exponent_(priority_exponent), floor_(priority_floor) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
  if (exponent_ < 0.0) throw ConfigError("priority exponent must be >= 0");
  if (!(floor_ > 0.0)) throw ConfigError("priority floor must be > 0");
  ring_.reserve(capacity_);
}

double ReplayMemory::max_priority() const {
  return priorities_.empty() ? 1.0 : *priorities_.rbegin();
}

void ReplayMemory::push(Transition t) {
  t.priority = max_priority();
  if (ring_.size() < capacity_) {
    priorities_.insert(t.priority);
    ring_.push_back(std::move(t));
  } else {
    priorities_.erase(priorities_.find(ring_[next_].priority));
    priorities_.insert(t.priority);
    ring_[next_] = std::move(t);
    next_ = (next_ + 1) % capacity_;
  }
}

std::vector<double> ReplayMemory::sampling_probabilities() const {
  std::vector<double> p(ring_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < ring_.size(); ++i) {
    p[i] = std::pow(ring_[i].priority + floor_, exponent_);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

std::vector<std::size_t> ReplayMemory::sample(std::size_t batch_size,
                                              std::mt19937_64& rng) const {
  if (ring_.empty()) throw ValidationError("cannot sample from an empty replay memory");
  std::vector<double> cumulative(ring_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < ring_.size(); ++i) {
    total += std::pow(ring_[i].priority + floor_, exponent_);
    cumulative[i] = total;
  }
  std::uniform_real_distribution<double> u(0.0, total);
  std::vector<std::size_t> out(batch_size);
  for (auto& idx : out) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u(rng));
    idx = std::min<std::size_t>(it - cumulative.begin(), ring_.size() - 1);
  }
  return out;
}

std::vector<std::size_t> ReplayMemory::sample(std::size_t batch_size, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  return sample(batch_size, rng);
}

void ReplayMemory::update_priorities(std::span<const std::size_t> indices,
                                     std::span<const double> td_errors) {
  if (indices.size() != td_errors.size())
    throw ConfigError("update_priorities: index/error length mismatch");
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= ring_.size())
      throw ValidationError(fmt::format("update_priorities: index {} out of range", i));
    priorities_.erase(priorities_.find(ring_[i].priority));
    ring_[i].priority = std::abs(td_errors[k]);
    priorities_.insert(ring_[i].priority);
  }
}

const Transition& ReplayMemory::at(std::size_t index) const {
  if (index >= ring_.size())
    throw ValidationError(fmt::format("replay index {} out of range", index));
  return ring_[index];
}

}  // namespace deers
