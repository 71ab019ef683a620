#pragma once

#include <span>

#include "hybridrank/ranker.hpp"

namespace hybridrank {

// Numerically stable ln(sigmoid(x)).
double log_sigmoid(double x);

// Pairwise-ranking objective for one (user, pos, neg) triple with L2 pull on
// the touched parameters:
//
//   f = ln sigma(x_ui - x_uj) - l2 * (|p_u|^2 + |q_i|^2 + |q_j|^2 + b_i^2 + b_j^2)
//   x_ui = b_i + <p_u, q_i>
//
// Exposed so gradients can be checked against finite differences of the same
// scalar.
double bpr_triple_objective(std::span<const double> p_u, std::span<const double> q_i,
                            std::span<const double> q_j, double b_i, double b_j, double l2);

struct BprTripleGrad {
  std::vector<double> p_u, q_i, q_j;
  double b_i = 0.0, b_j = 0.0;
};

BprTripleGrad bpr_triple_gradient(std::span<const double> p_u, std::span<const double> q_i,
                                  std::span<const double> q_j, double b_i, double b_j, double l2);

// Matrix-factorization ranker trained by stochastic gradient ascent on
// sampled (user, rated, unrated) triples. score(u, i) = b_i + <p_u, q_i>.
// Embeddings start from a seeded normal with stddev 0.01; item biases start
// at zero. One epoch draws as many triples as there are train interactions.
// With a validation set, training stops after early_stop_patience epochs
// without improvement in sampled pairwise accuracy and keeps the best state.
class BprRanker final : public Ranker {
public:
  static BprRanker train(const Dataset& train_data, const HyperParams& hp, std::uint64_t seed,
                         const Dataset* validation = nullptr);

  RankerKind kind() const override { return RankerKind::bpr; }
  double score(int user, int item) const override;
  nlohmann::ordered_json to_json() const override;
  static BprRanker from_json(const nlohmann::json& j);

  int trained_epochs() const { return trained_epochs_; }

private:
  std::span<const double> user_vec(int u) const;
  std::span<const double> item_vec(int i) const;

  std::vector<double> user_emb_;  // n_users x dim, row major
  std::vector<double> item_emb_;  // n_items x dim
  std::vector<double> item_bias_;
  int trained_epochs_ = 0;
};

}  // namespace hybridrank
