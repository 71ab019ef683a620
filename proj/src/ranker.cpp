#include "hybridrank/ranker.hpp"

#include <algorithm>
#include <fstream>

#include "hybridrank/bpr.hpp"
#include "hybridrank/itemknn.hpp"
#include "hybridrank/ncf.hpp"
#include "hybridrank/rng.hpp"

namespace hybridrank {

RankerKind ranker_kind_from_string(const std::string& name) {
  if (name == "itemknn") return RankerKind::itemknn;
  if (name == "bpr") return RankerKind::bpr;
  if (name == "ncf") return RankerKind::ncf;
  throw ParseError("unknown model kind '" + name + "'");
}

std::string to_string(RankerKind kind) {
  switch (kind) {
    case RankerKind::itemknn: return "itemknn";
    case RankerKind::bpr: return "bpr";
    case RankerKind::ncf: return "ncf";
  }
  return "?";
}

nlohmann::ordered_json HyperParams::to_json() const {
  nlohmann::ordered_json j;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["embedding_dim"] = embedding_dim;
  j["mlp_hidden"] = mlp_hidden;
  j["dropout"] = dropout;
  j["k_neighbors"] = k_neighbors;
  j["shrink"] = shrink;
  j["l2_reg"] = l2_reg;
  j["negatives_per_positive"] = negatives_per_positive;
  j["early_stop_patience"] = early_stop_patience;
  return j;
}

HyperParams HyperParams::from_json(const nlohmann::json& j) {
  HyperParams hp;
  hp.learning_rate = j.value("learning_rate", hp.learning_rate);
  hp.epochs = j.value("epochs", hp.epochs);
  hp.embedding_dim = j.value("embedding_dim", hp.embedding_dim);
  hp.mlp_hidden = j.value("mlp_hidden", hp.mlp_hidden);
  hp.dropout = j.value("dropout", hp.dropout);
  hp.k_neighbors = j.value("k_neighbors", hp.k_neighbors);
  hp.shrink = j.value("shrink", hp.shrink);
  hp.l2_reg = j.value("l2_reg", hp.l2_reg);
  hp.negatives_per_positive = j.value("negatives_per_positive", hp.negatives_per_positive);
  hp.early_stop_patience = j.value("early_stop_patience", hp.early_stop_patience);
  return hp;
}

void Ranker::check_ids(int user, int item) const {
  if (user < 0 || user >= n_users_) throw std::out_of_range("user index out of range");
  if (item < 0 || item >= n_items_) throw std::out_of_range("item index out of range");
}

std::vector<int> rank_candidates(const Ranker& model, int user, std::span<const int> candidates) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    scored.emplace_back(model.score(user, candidates[k]), k);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<int> out;
  out.reserve(candidates.size());
  for (const auto& [s, k] : scored) out.push_back(candidates[k]);
  return out;
}

void save_ranker(const Ranker& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write model file " + path.string());
  out << model.to_json().dump(2) << '\n';
}

std::unique_ptr<Ranker> load_ranker(const nlohmann::json& j) {
  const auto kind = ranker_kind_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case RankerKind::itemknn:
      return std::make_unique<ItemKnnRanker>(ItemKnnRanker::from_json(j));
    case RankerKind::bpr:
      return std::make_unique<BprRanker>(BprRanker::from_json(j));
    case RankerKind::ncf:
      return std::make_unique<NcfRanker>(NcfRanker::from_json(j));
  }
  throw ParseError("unknown model kind");
}

std::unique_ptr<Ranker> load_ranker_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file " + path.string());
  nlohmann::json j;
  in >> j;
  return load_ranker(j);
}

double sampled_pairwise_auc(const Ranker& model, const Dataset& holdout, const Dataset& train,
                            std::uint64_t seed) {
  Rng rng(seed);
  double wins = 0.0;
  std::size_t pairs = 0;
  for (const auto& row : holdout.interactions()) {
    int j = -1;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const int cand = rng.uniform_int(model.item_count());
      if (!train.contains(row.user, cand) && !holdout.contains(row.user, cand)) {
        j = cand;
        break;
      }
    }
    if (j < 0) continue;
    const double s_pos = model.score(row.user, row.item);
    const double s_neg = model.score(row.user, j);
    if (s_pos > s_neg) {
      wins += 1.0;
    } else if (s_pos == s_neg) {
      wins += 0.5;
    }
    ++pairs;
  }
  return pairs ? wins / static_cast<double>(pairs) : 0.0;
}

}  // namespace hybridrank
