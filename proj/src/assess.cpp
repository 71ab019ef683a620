#include "hybridrank/assess.hpp"

#include <algorithm>
#include <sstream>

#include "hybridrank/metrics.hpp"
#include "hybridrank/rng.hpp"

namespace hybridrank {

double default_relevance_cutoff(const RatingScale& scale) {
  return scale.max <= 5.0 ? 4.0 : 6.0;
}

UserPools build_user_pools(const SplitDataset& split, int user, const Thresholds& thr,
                           std::uint64_t seed) {
  UserPools pools;
  for (const auto& r : split.test.user_interactions(user)) {
    if (r.rating >= thr.relevance_cutoff) {
      pools.relevant.push_back(r.item);
    } else {
      pools.irrelevant.push_back(r.item);
    }
  }

  if (thr.n_sampled_negatives > 0) {
    const auto train_items = split.train.items_of(user);
    const auto valid_items = split.validation.items_of(user);
    const auto test_items = split.test.items_of(user);
    const auto touched = [&](int item) {
      return std::binary_search(train_items.begin(), train_items.end(), item) ||
             std::binary_search(valid_items.begin(), valid_items.end(), item) ||
             std::binary_search(test_items.begin(), test_items.end(), item);
    };
    std::vector<int> never;
    never.reserve(static_cast<std::size_t>(split.train.item_count()));
    for (int i = 0; i < split.train.item_count(); ++i) {
      if (!touched(i)) never.push_back(i);
    }
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(user)));
    auto sampled = rng.sample(std::move(never), static_cast<std::size_t>(thr.n_sampled_negatives));
    std::sort(sampled.begin(), sampled.end());
    pools.irrelevant.insert(pools.irrelevant.end(), sampled.begin(), sampled.end());
  }
  return pools;
}

std::vector<UserAssessment> assess_users(const SplitDataset& split, const Dataset& full,
                                         const Ranker& model, const Thresholds& thr,
                                         std::uint64_t negatives_seed) {
  std::vector<UserAssessment> out;
  out.reserve(static_cast<std::size_t>(full.user_count()));
  for (int u = 0; u < full.user_count(); ++u) {
    UserAssessment a;
    a.user = u;
    a.user_id = full.vocab().user_ids[static_cast<std::size_t>(u)];
    a.sparsity = sparsity_index(full.user_degree(u), static_cast<std::size_t>(full.item_count()));
    a.n_train = static_cast<int>(split.train.user_degree(u));
    a.n_test = static_cast<int>(split.test.user_degree(u));

    const UserPools pools = build_user_pools(split, u, thr, negatives_seed);
    if (!pools.relevant.empty() && !pools.irrelevant.empty()) {
      std::vector<double> rel_scores, irr_scores;
      rel_scores.reserve(pools.relevant.size());
      irr_scores.reserve(pools.irrelevant.size());
      for (const int i : pools.relevant) rel_scores.push_back(model.score(u, i));
      for (const int i : pools.irrelevant) irr_scores.push_back(model.score(u, i));
      a.auc = user_auc(rel_scores, irr_scores);
      a.auc_defined = true;
    }
    out.push_back(std::move(a));
  }
  return out;
}

Classification classify_users(std::vector<UserAssessment>& assessments, const Thresholds& thr) {
  Classification cls;
  for (auto& a : assessments) {
    a.inactive = a.sparsity < thr.t_s;
    a.weak = a.inactive && a.auc <= thr.t_p;
    (a.weak ? cls.weak : cls.strong).push_back(a.user);
  }
  return cls;
}

std::string assessment_csv(const std::vector<UserAssessment>& assessments) {
  std::ostringstream out;
  out << "user_id,n_train,n_test,sparsity_index,auc_rs,inactive,weak\n";
  for (const auto& a : assessments) {
    out << a.user_id << ',' << a.n_train << ',' << a.n_test << ','
        << nlohmann::json(a.sparsity).dump() << ',' << nlohmann::json(a.auc).dump() << ','
        << (a.inactive ? 1 : 0) << ',' << (a.weak ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace hybridrank
