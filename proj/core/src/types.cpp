#include "deers/types.hpp"

#include <fmt/format.h>

namespace deers {

const char* to_string(Feedback f) {
  switch (f) {
    case Feedback::kSkip:
      return "skip";
    case Feedback::kClick:
      return "click";
    case Feedback::kOrder:
      return "order";
  }
  throw ValidationError("unknown feedback value");
}

Feedback feedback_from_string(const std::string& s) {
  if (s == "skip") return Feedback::kSkip;
  if (s == "click") return Feedback::kClick;
  if (s == "order") return Feedback::kOrder;
  throw ValidationError(fmt::format("unknown feedback label '{}'", s));
}

double RewardMap::reward(Feedback f) const {
  switch (f) {
    case Feedback::kSkip:
      return skip;
    case Feedback::kClick:
      return click;
    case Feedback::kOrder:
      return order;
  }
  throw ValidationError("unknown feedback value");
}

void RewardMap::validate() const {
  if (skip != 0.0) throw ConfigError("reward map: skip reward must be 0");
  if (!(click > 0.0) || !(order > 0.0))
    throw ConfigError("reward map: click and order rewards must be positive");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace deers
