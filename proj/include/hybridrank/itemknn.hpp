#pragma once

#include "hybridrank/ranker.hpp"

namespace hybridrank {

// Item-based neighborhood model on the explicit rating matrix.
//
//   sim(i, j) = <r_i, r_j> / (||r_i|| * ||r_j|| + shrink)
//
// where r_i is item i's rating column over users. Each item keeps its
// k_neighbors most similar items (ties broken toward the lower item index;
// zero similarities dropped). Prediction is the similarity-weighted mean of
// the user's train ratings over the target item's kept neighbors:
//
//   score(u, i) = sum_j sim(i, j) * r_uj / (sum_j |sim(i, j)| + 1e-9)
//
// A user with no rated neighbor of i scores exactly 0.
class ItemKnnRanker final : public Ranker {
public:
  static ItemKnnRanker train(const Dataset& train_data, int k_neighbors, double shrink);

  RankerKind kind() const override { return RankerKind::itemknn; }
  double score(int user, int item) const override;
  nlohmann::ordered_json to_json() const override;
  static ItemKnnRanker from_json(const nlohmann::json& j);

  // Kept similarity of a pair, 0 when j is not among i's kept neighbors.
  double similarity(int i, int j) const;
  std::size_t neighbor_count(int i) const { return neighbors_[static_cast<std::size_t>(i)].size(); }

private:
  // Per item: (neighbor, sim), ascending by neighbor index for lookup.
  std::vector<std::vector<std::pair<int, double>>> neighbors_;
  // Per user: train (item, rating) pairs; the scoring-time user profile.
  std::vector<std::vector<std::pair<int, double>>> profiles_;
};

}  // namespace hybridrank
