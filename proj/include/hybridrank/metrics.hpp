#pragma once

#include <span>
#include <unordered_set>
#include <vector>

#include "hybridrank/dataset.hpp"

namespace hybridrank {

// Probability that a uniformly drawn relevant item scores above a uniformly
// drawn irrelevant one; ties count half. Computed from the rank-sum of the
// relevant scores with average ranks on ties, which is exact for the pair
// count without enumerating pairs. Throws std::invalid_argument when either
// side is empty (the caller decides the undefined-AUC policy).
double user_auc(std::span<const double> relevant_scores, std::span<const double> irrelevant_scores);

// Binary-relevance NDCG with log2 position discount over the top k of a
// ranked item list. Returns 0 when the user has no relevant items.
double ndcg_at_k(std::span<const int> ranked, const std::unordered_set<int>& relevant, int k);

// Fraction of the catalog the user has rated.
double sparsity_index(std::size_t n_rated, std::size_t n_items);

// Mean per-user sparsity index; the activity threshold used to call a user
// inactive when no fixed threshold is configured.
double mean_sparsity_threshold(const Dataset& data);

}  // namespace hybridrank
