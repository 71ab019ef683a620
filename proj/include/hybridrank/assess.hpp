#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hybridrank/ranker.hpp"
#include "hybridrank/split.hpp"

namespace hybridrank {

struct Thresholds {
  double t_p = 0.5;              // a user whose AUC is <= t_p is poorly served
  double t_s = 0.0;              // sparsity below this marks a user inactive
  double relevance_cutoff = 4.0; // rating >= cutoff counts as relevant
  int n_sampled_negatives = 100;
};

// The rating floor that separates relevant from irrelevant test items:
// 4 of 5 on narrow scales, 6 of 10 on wide ones.
double default_relevance_cutoff(const RatingScale& scale);

// Evaluation pool of one user. relevant holds the user's test items at or
// above the cutoff; irrelevant holds the remaining test items plus
// n_sampled_negatives items the user never touched in any split, sampled
// without replacement from a per-user substream of seed.
struct UserPools {
  std::vector<int> relevant;
  std::vector<int> irrelevant;
};

UserPools build_user_pools(const SplitDataset& split, int user, const Thresholds& thr,
                           std::uint64_t seed);

struct UserAssessment {
  int user = -1;
  std::string user_id;
  double auc = 0.0;        // 0 when undefined; see auc_defined
  bool auc_defined = false;
  double sparsity = 0.0;
  int n_train = 0;
  int n_test = 0;
  bool inactive = false;
  bool weak = false;
};

// Scores every user's pool with the model. full is the filtered pre-split
// dataset; it supplies the sparsity numerator. Users with an empty pool side
// keep auc 0 and auc_defined false.
std::vector<UserAssessment> assess_users(const SplitDataset& split, const Dataset& full,
                                         const Ranker& model, const Thresholds& thr,
                                         std::uint64_t negatives_seed);

struct Classification {
  std::vector<int> weak;
  std::vector<int> strong;
};

// Marks inactive (sparsity < t_s) and weak (auc <= t_p and inactive) in
// place and returns the two user-id partitions in ascending order.
Classification classify_users(std::vector<UserAssessment>& assessments, const Thresholds& thr);

std::string assessment_csv(const std::vector<UserAssessment>& assessments);

}  // namespace hybridrank
