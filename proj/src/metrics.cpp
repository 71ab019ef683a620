#include "hybridrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybridrank {

double user_auc(std::span<const double> relevant_scores, std::span<const double> irrelevant_scores) {
  if (relevant_scores.empty() || irrelevant_scores.empty()) {
    throw std::invalid_argument("user_auc: empty relevant or irrelevant side");
  }
  const std::size_t n_rel = relevant_scores.size();
  const std::size_t n_irr = irrelevant_scores.size();

  std::vector<std::pair<double, bool>> pool;
  pool.reserve(n_rel + n_irr);
  for (const double s : relevant_scores) pool.emplace_back(s, true);
  for (const double s : irrelevant_scores) pool.emplace_back(s, false);
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Rank-sum with average ranks on tied scores (1-based ranks).
  double rel_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < pool.size()) {
    std::size_t j = i;
    while (j < pool.size() && pool[j].first == pool[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) {
      if (pool[k].second) rel_rank_sum += avg_rank;
    }
    i = j;
  }

  const double u_stat =
      rel_rank_sum - 0.5 * static_cast<double>(n_rel) * static_cast<double>(n_rel + 1);
  return u_stat / (static_cast<double>(n_rel) * static_cast<double>(n_irr));
}

double ndcg_at_k(std::span<const int> ranked, const std::unordered_set<int>& relevant, int k) {
  if (k <= 0) throw std::invalid_argument("ndcg_at_k: k must be positive");
  if (relevant.empty()) return 0.0;

  const std::size_t depth = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t pos = 0; pos < depth; ++pos) {
    if (relevant.count(ranked[pos])) dcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
  }

  const std::size_t ideal = std::min<std::size_t>(relevant.size(), static_cast<std::size_t>(k));
  double idcg = 0.0;
  for (std::size_t pos = 0; pos < ideal; ++pos) {
    idcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
  }
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double sparsity_index(std::size_t n_rated, std::size_t n_items) {
  if (n_items == 0) throw std::invalid_argument("sparsity_index: empty catalog");
  return static_cast<double>(n_rated) / static_cast<double>(n_items);
}

double mean_sparsity_threshold(const Dataset& data) {
  const int n_users = data.user_count();
  if (n_users == 0 || data.item_count() == 0) {
    throw std::invalid_argument("mean_sparsity_threshold: empty dataset");
  }
  double acc = 0.0;
  for (int u = 0; u < n_users; ++u) {
    acc += sparsity_index(data.user_degree(u), static_cast<std::size_t>(data.item_count()));
  }
  return acc / static_cast<double>(n_users);
}

}  // namespace hybridrank
