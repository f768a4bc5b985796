#include "deers/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace deers {

double average_precision(std::span<const double> ranked_rewards) {
  std::size_t relevant = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < ranked_rewards.size(); ++i)
    if (ranked_rewards[i] > 0.0) {
      ++relevant;
      sum += static_cast<double>(relevant) / static_cast<double>(i + 1);
    }
  if (relevant == 0)
    throw std::invalid_argument("average_precision undefined without relevant items");
  return sum / static_cast<double>(relevant);
}

namespace {

double dcg(std::span<const double> rewards, std::size_t k) {
  double out = 0.0;
  const std::size_t n = std::min(k, rewards.size());
  for (std::size_t i = 0; i < n; ++i)
    out += (std::exp2(rewards[i]) - 1.0) / std::log2(static_cast<double>(i + 2));
  return out;
}

}  // namespace

double ndcg_at_k(std::span<const double> ranked_rewards, std::size_t k) {
  bool any = false;
  for (double r : ranked_rewards)
    if (r > 0.0) any = true;
  if (!any) throw std::invalid_argument("ndcg undefined without relevant items");
  std::vector<double> ideal(ranked_rewards.begin(), ranked_rewards.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  return dcg(ranked_rewards, k) / dcg(ideal, k);
}

}  // namespace deers
