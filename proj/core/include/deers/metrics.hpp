#pragma once

#include <span>

namespace deers {

// Binary-relevance average precision over a ranked reward list; relevance is
// reward > 0. Undefined (throws) when nothing is relevant.
double average_precision(std::span<const double> ranked_rewards);

// Graded-gain NDCG truncated at rank k:
//   DCG = sum_{i<=k} (2^reward_i - 1) / log2(i + 1)
// normalized by the reward-descending ideal ordering. Throws when nothing is
// relevant.
double ndcg_at_k(std::span<const double> ranked_rewards, std::size_t k = 40);

}  // namespace deers
