#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "deers/session.hpp"
#include "deers/types.hpp"

namespace deers {

struct Item {
  ItemId id = kPaddingId;
  CategoryId category = 0;
  Eigen::VectorXd embedding;
};

// Skip-gram with negative sampling over the positive-feedback subsequence of
// each session. Window/negatives/learning rate are conventional defaults; the
// learning rate decays linearly over all training pairs.
struct SkipGramConfig {
  int dim = 50;
  int epochs = 5;
  int window = 2;
  int negatives = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;
};

// Immutable item universe: ids, categories, learned embeddings and (once
// built) the cosine nearest-neighbor lists used by item recall. Safe to share
// across threads after construction.
class Catalog {
 public:
  Catalog() = default;
  static Catalog from_items(std::vector<Item> items);

  bool contains(ItemId id) const { return index_.count(id) != 0; }
  const Item& item(ItemId id) const;
  // Resolves kPaddingId to the all-zero vector.
  const Eigen::VectorXd& embedding(ItemId id) const;
  std::size_t size() const { return items_.size(); }
  int dim() const { return dim_; }
  const std::vector<Item>& items() const { return items_; }  // ascending id

  bool has_neighbor_index() const { return !neighbors_.empty(); }
  const std::vector<ItemId>& neighbors(ItemId id) const;

 private:
  friend Catalog build_neighbor_index(Catalog catalog, int k);

  std::vector<Item> items_;  // ascending id
  std::unordered_map<ItemId, std::size_t> index_;
  std::vector<std::vector<ItemId>> neighbors_;  // parallel to items_
  Eigen::VectorXd zero_;
  int dim_ = 0;
};

Catalog train_embeddings(const std::vector<Session>& sessions, const SkipGramConfig& config);

// Attaches min(k, size-1) cosine neighbors per item, descending similarity,
// ties broken by ascending item id. Rejects all-zero embeddings.
Catalog build_neighbor_index(Catalog catalog, int k);

// Union of each history item's top-k neighbors plus the history itself.
// Empty history yields the empty set; callers fall back to the full catalog.
std::set<ItemId> recall_candidates(const Catalog& catalog,
                                   const std::vector<ItemId>& positive_history, int k);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Line-oriented text format: "item_count dim" header, then per item
// "item_id category_id v_1 ... v_dim".
void write_catalog(const Catalog& catalog, const std::string& path);
Catalog read_catalog(const std::string& path);

}  // namespace deers
