#include "deers/catalog.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "deers/log.hpp"

namespace deers {

Catalog Catalog::from_items(std::vector<Item> items) {
  Catalog c;
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.id < b.id; });
  for (const auto& it : items) {
    if (it.id == kPaddingId)
      throw ValidationError(fmt::format("catalog: item id {} is reserved for padding", kPaddingId));
    if (c.index_.count(it.id))
      throw ValidationError(fmt::format("catalog: duplicate item id {}", it.id));
    if (c.dim_ == 0)
      c.dim_ = static_cast<int>(it.embedding.size());
    else if (it.embedding.size() != c.dim_)
      throw ValidationError(fmt::format("catalog: item {} embedding length {} != {}", it.id,
                                        it.embedding.size(), c.dim_));
    if (!it.embedding.allFinite())
      throw ValidationError(fmt::format("catalog: item {} embedding has non-finite entries", it.id));
    c.index_.emplace(it.id, c.items_.size());
    c.items_.push_back(it);
  }
  if (c.dim_ < 1) throw ValidationError("catalog: no items");
  c.zero_ = Eigen::VectorXd::Zero(c.dim_);
  return c;
}

const Item& Catalog::item(ItemId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError(fmt::format("catalog: unknown item id {}", id));
  return items_[it->second];
}

const Eigen::VectorXd& Catalog::embedding(ItemId id) const {
  if (id == kPaddingId) return zero_;
  return item(id).embedding;
}

const std::vector<ItemId>& Catalog::neighbors(ItemId id) const {
  if (!has_neighbor_index()) throw ValidationError("catalog: neighbor index not built");
  auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError(fmt::format("catalog: unknown item id {}", id));
  return neighbors_[it->second];
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Catalog train_embeddings(const std::vector<Session>& sessions, const SkipGramConfig& config) {
  if (sessions.empty()) throw ValidationError("empty corpus");
  if (config.dim < 2) throw ConfigError("embedding dim must be >= 2");
  if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (config.window < 1 || config.negatives < 0 || !(config.learning_rate > 0.0))
    throw ConfigError("invalid skip-gram configuration");

  // Vocabulary covers every item observed in any event; categories must be
  // consistent across the corpus.
  std::map<ItemId, CategoryId> categories;
  for (const auto& s : sessions) {
    s.validate();
    for (const auto& e : s.events) {
      auto [it, inserted] = categories.emplace(e.item, e.category);
      if (!inserted && it->second != e.category)
        throw ValidationError(fmt::format(
            "item {} appears with conflicting categories {} and {}", e.item, it->second,
            e.category));
    }
  }

  std::vector<ItemId> vocab;
  vocab.reserve(categories.size());
  std::unordered_map<ItemId, int> vocab_index;
  for (const auto& [id, cat] : categories) {
    vocab_index.emplace(id, static_cast<int>(vocab.size()));
    vocab.push_back(id);
  }
  const int n = static_cast<int>(vocab.size());
  const int dim = config.dim;

  // Sentences are the clicked/ordered subsequences, one per session.
  std::vector<std::vector<int>> sentences;
  std::vector<std::int64_t> counts(n, 0);
  for (const auto& s : sessions) {
    std::vector<int> sentence;
    for (const auto& e : s.events)
      if (e.positive()) {
        int idx = vocab_index.at(e.item);
        sentence.push_back(idx);
        ++counts[idx];
      }
    if (!sentence.empty()) sentences.push_back(std::move(sentence));
  }

  std::mt19937_64 rng(derive_seed(config.seed, 0xe3bbu));
  std::uniform_real_distribution<double> unit(-0.5, 0.5);

  Eigen::MatrixXd in(dim, n);   // item vectors (the embeddings)
  Eigen::MatrixXd out(dim, n);  // context vectors
  for (int j = 0; j < n; ++j)
    for (int r = 0; r < dim; ++r) in(r, j) = unit(rng) / dim;
  out.setZero();

  // Unigram^0.75 negative-sampling distribution over positive occurrences.
  std::vector<double> cdf;
  std::vector<int> sampleable;
  {
    double total = 0.0;
    for (int j = 0; j < n; ++j)
      if (counts[j] > 0) {
        total += std::pow(static_cast<double>(counts[j]), 0.75);
        sampleable.push_back(j);
        cdf.push_back(total);
      }
    for (auto& v : cdf) v /= total;
  }
  auto sample_negative = [&](std::mt19937_64& r) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u01(r));
    std::size_t k = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
    return sampleable[k];
  };

  std::int64_t total_pairs = 0;
  for (const auto& sentence : sentences) {
    const int len = static_cast<int>(sentence.size());
    for (int i = 0; i < len; ++i) {
      int lo = std::max(0, i - config.window);
      int hi = std::min(len - 1, i + config.window);
      total_pairs += (hi - lo);  // excludes the center position itself
    }
  }
  total_pairs *= config.epochs;

  if (total_pairs > 0 && !sampleable.empty()) {
    std::int64_t step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      for (const auto& sentence : sentences) {
        const int len = static_cast<int>(sentence.size());
        for (int i = 0; i < len; ++i) {
          const int center = sentence[i];
          int lo = std::max(0, i - config.window);
          int hi = std::min(len - 1, i + config.window);
          for (int j = lo; j <= hi; ++j) {
            if (j == i) continue;
            const double lr =
                config.learning_rate *
                std::max(1e-4, 1.0 - static_cast<double>(step) / static_cast<double>(total_pairs));
            ++step;
            const int context = sentence[j];
            Eigen::VectorXd accum = Eigen::VectorXd::Zero(dim);
            // one positive pair plus config.negatives sampled items
            for (int neg = 0; neg <= config.negatives; ++neg) {
              int target;
              double label;
              if (neg == 0) {
                target = context;
                label = 1.0;
              } else {
                target = sample_negative(rng);
                if (target == context) continue;
                label = 0.0;
              }
              const double score = sigmoid(in.col(center).dot(out.col(target)));
              const double g = lr * (label - score);
              accum.noalias() += g * out.col(target);
              out.col(target).noalias() += g * in.col(center);
            }
            in.col(center).noalias() += accum;
          }
        }
      }
    }
  }

  std::vector<Item> items;
  items.reserve(n);
  for (int j = 0; j < n; ++j)
    items.push_back(Item{vocab[j], categories.at(vocab[j]), in.col(j)});
  log_info("trained {}-dim embeddings for {} items over {} sessions", dim, n, sessions.size());
  return Catalog::from_items(std::move(items));
}

Catalog build_neighbor_index(Catalog catalog, int k) {
  if (k < 1) throw ConfigError("neighbor count k must be >= 1");
  const auto& items = catalog.items();
  const int n = static_cast<int>(items.size());
  for (const auto& it : items)
    if (it.embedding.isZero(0.0))
      throw ValidationError(fmt::format("degenerate embedding for item {}", it.id));

  const int take = std::min(k, n - 1);
  catalog.neighbors_.assign(n, {});
  std::vector<std::pair<double, ItemId>> scored;
  for (int i = 0; i < n; ++i) {
    scored.clear();
    scored.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      scored.emplace_back(cosine_similarity(items[i].embedding, items[j].embedding),
                          items[j].id);
    }
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    auto& list = catalog.neighbors_[i];
    list.reserve(take);
    for (int t = 0; t < take; ++t) list.push_back(scored[t].second);
  }
  return catalog;
}

std::set<ItemId> recall_candidates(const Catalog& catalog,
                                   const std::vector<ItemId>& positive_history, int k) {
  if (k < 1) throw ConfigError("recall k must be >= 1");
  std::set<ItemId> out;
  for (ItemId id : positive_history) {
    if (id == kPaddingId) continue;
    const auto& neigh = catalog.neighbors(id);
    out.insert(id);
    const int take = std::min<int>(k, static_cast<int>(neigh.size()));
    out.insert(neigh.begin(), neigh.begin() + take);
  }
  return out;
}

void write_catalog(const Catalog& catalog, const std::string& path) {
  std::ofstream outf(path, std::ios::trunc);
  if (!outf) throw ValidationError(fmt::format("cannot write catalog '{}'", path));
  outf << catalog.size() << ' ' << catalog.dim() << '\n';
  for (const auto& it : catalog.items()) {
    outf << it.id << ' ' << it.category;
    for (int r = 0; r < catalog.dim(); ++r) outf << ' ' << fmt::format("{:.17g}", it.embedding(r));
    outf << '\n';
  }
  if (!outf) throw ValidationError(fmt::format("short write on catalog '{}'", path));
}

Catalog read_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open catalog '{}'", path));
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(fmt::format("{}: empty catalog file", path));
  std::istringstream header(line);
  std::size_t count = 0;
  int dim = 0;
  if (!(header >> count >> dim) || dim < 1)
    throw ValidationError(fmt::format("{}: malformed catalog header '{}'", path, line));

  std::vector<Item> items;
  items.reserve(count);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    Item it;
    if (!(row >> it.id >> it.category))
      throw ValidationError(fmt::format("{}:{}: malformed catalog row", path, line_no));
    it.embedding.resize(dim);
    for (int r = 0; r < dim; ++r)
      if (!(row >> it.embedding(r)))
        throw ValidationError(
            fmt::format("{}:{}: expected {} embedding values", path, line_no, dim));
    std::string extra;
    if (row >> extra)
      throw ValidationError(fmt::format("{}:{}: trailing fields in catalog row", path, line_no));
    items.push_back(std::move(it));
  }
  if (items.size() != count)
    throw ValidationError(
        fmt::format("{}: header claims {} items, found {}", path, count, items.size()));
  return Catalog::from_items(std::move(items));
}

}  // namespace deers
