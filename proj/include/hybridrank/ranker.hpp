#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hybridrank/dataset.hpp"

namespace hybridrank {

enum class RankerKind { itemknn, bpr, ncf };

RankerKind ranker_kind_from_string(const std::string& name);
std::string to_string(RankerKind kind);

struct HyperParams {
  double learning_rate = 5e-3;
  int epochs = 30;
  int embedding_dim = 64;
  std::vector<int> mlp_hidden{64, 32, 16};
  double dropout = 0.0;
  int k_neighbors = 100;
  double shrink = 0.0;
  double l2_reg = 1e-4;
  int negatives_per_positive = 4;
  int early_stop_patience = 5;

  nlohmann::ordered_json to_json() const;
  static HyperParams from_json(const nlohmann::json& j);
};

// A trained scoring model over one vocabulary. score() is deterministic and
// thread safe once training is done.
class Ranker {
public:
  virtual ~Ranker() = default;
  virtual RankerKind kind() const = 0;
  virtual double score(int user, int item) const = 0;
  virtual nlohmann::ordered_json to_json() const = 0;

  int user_count() const { return n_users_; }
  int item_count() const { return n_items_; }
  const HyperParams& hyperparams() const { return hp_; }
  std::uint64_t training_seed() const { return seed_; }

protected:
  void check_ids(int user, int item) const;

  int n_users_ = 0;
  int n_items_ = 0;
  HyperParams hp_;
  std::uint64_t seed_ = 0;
};

// Candidates sorted by score descending; equal scores keep the caller's
// candidate order (stable), so ranking is reproducible.
std::vector<int> rank_candidates(const Ranker& model, int user, std::span<const int> candidates);

void save_ranker(const Ranker& model, const std::filesystem::path& path);
std::unique_ptr<Ranker> load_ranker(const nlohmann::json& j);
std::unique_ptr<Ranker> load_ranker_file(const std::filesystem::path& path);

// Mean sampled pairwise ordering accuracy on held-out interactions, used for
// early stopping. For each holdout interaction (u, i) it draws one item j the
// user never touched in train or holdout and checks score(u,i) > score(u,j).
double sampled_pairwise_auc(const Ranker& model, const Dataset& holdout, const Dataset& train,
                            std::uint64_t seed);

}  // namespace hybridrank
