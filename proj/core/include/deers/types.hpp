#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace deers {

using ItemId = std::int64_t;
using CategoryId = std::int64_t;

// Reserved id whose embedding is the all-zero vector. It pads short state
// windows and must never appear in a session log or a catalog file.
inline constexpr ItemId kPaddingId = 0;

enum class Feedback : int { kSkip = 0, kClick = 1, kOrder = 2 };

inline constexpr int kFeedbackClasses = 3;

const char* to_string(Feedback f);
Feedback feedback_from_string(const std::string& s);

// Immediate reward per feedback class. Skip must stay at exactly zero and the
// positive classes strictly above it: state transitions key on r > 0 vs r == 0.
struct RewardMap {
  double skip = 0.0;
  double click = 1.0;
  double order = 5.0;

  double reward(Feedback f) const;
  void validate() const;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the training loop must stop (non-finite loss or gradient).
class TrainingAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// splitmix64 step; used to derive independent child seeds from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace deers
