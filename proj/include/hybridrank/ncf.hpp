#pragma once

#include <span>

#include "hybridrank/ranker.hpp"

namespace hybridrank {

// MLP over concatenated user/item embeddings. Layer l maps width[l-1] ->
// width[l] with ReLU; a final linear unit feeds a sigmoid. Weights are public
// so tests can perturb individual scalars.
struct NcfNet {
  int input_dim = 0;
  std::vector<int> hidden;
  std::vector<std::vector<double>> weights;  // per layer, row major out x in
  std::vector<std::vector<double>> biases;   // per layer
  std::vector<double> out_weights;
  double out_bias = 0.0;

  static NcfNet zeros(int input_dim, const std::vector<int>& hidden);
  // Pre-sigmoid logit; scratch-free forward without dropout.
  double logit(std::span<const double> input) const;
};

// Binary cross entropy of one (user embedding, item embedding, label) example
// plus l2 times the squared norm of every touched parameter. No dropout.
double ncf_example_loss(const NcfNet& net, std::span<const double> p_u,
                        std::span<const double> q_i, double label, double l2);

struct NcfExampleGrad {
  NcfNet net;  // same shapes as the input net, holding d(loss)/d(param)
  std::vector<double> p_u, q_i;
};

NcfExampleGrad ncf_example_gradient(const NcfNet& net, std::span<const double> p_u,
                                    std::span<const double> q_i, double label, double l2);

// Neural ranker trained with pointwise binary cross entropy: every train
// interaction is a positive; negatives_per_positive unrated items per
// positive are sampled as negatives. Inverted dropout on hidden activations
// during training only. score(u, i) = sigmoid(mlp(p_u ++ q_i)), always inside
// (0, 1). Deterministic for a fixed seed; dropout 0 does not change the draw
// sequence.
class NcfRanker final : public Ranker {
public:
  static NcfRanker train(const Dataset& train_data, const HyperParams& hp, std::uint64_t seed,
                         const Dataset* validation = nullptr);

  RankerKind kind() const override { return RankerKind::ncf; }
  double score(int user, int item) const override;
  nlohmann::ordered_json to_json() const override;
  static NcfRanker from_json(const nlohmann::json& j);

  int trained_epochs() const { return trained_epochs_; }
  const NcfNet& net() const { return net_; }

private:
  std::vector<double> user_emb_;
  std::vector<double> item_emb_;
  NcfNet net_;
  int trained_epochs_ = 0;
};

}  // namespace hybridrank
