#include "hybridrank/itemknn.hpp"

#include <algorithm>
#include <cmath>

namespace hybridrank {

ItemKnnRanker ItemKnnRanker::train(const Dataset& train_data, int k_neighbors, double shrink) {
  if (k_neighbors <= 0) throw std::invalid_argument("k_neighbors must be positive");
  if (shrink < 0.0) throw std::invalid_argument("shrink must be non-negative");

  ItemKnnRanker model;
  model.n_users_ = train_data.user_count();
  model.n_items_ = train_data.item_count();
  model.hp_.k_neighbors = k_neighbors;
  model.hp_.shrink = shrink;

  const std::size_t n_items = static_cast<std::size_t>(model.n_items_);
  const std::size_t n_users = static_cast<std::size_t>(model.n_users_);

  model.profiles_.assign(n_users, {});
  std::vector<std::vector<std::pair<int, double>>> raters(n_items);  // item -> (user, rating)
  for (int u = 0; u < model.n_users_; ++u) {
    for (const auto& r : train_data.user_interactions(u)) {
      model.profiles_[static_cast<std::size_t>(u)].emplace_back(r.item, r.rating);
      raters[static_cast<std::size_t>(r.item)].emplace_back(u, r.rating);
    }
    auto& prof = model.profiles_[static_cast<std::size_t>(u)];
    std::sort(prof.begin(), prof.end());
  }

  std::vector<double> norm(n_items, 0.0);
  for (std::size_t i = 0; i < n_items; ++i) {
    for (const auto& [u, r] : raters[i]) norm[i] += r * r;
    norm[i] = std::sqrt(norm[i]);
  }

  model.neighbors_.assign(n_items, {});
  std::vector<double> dot(n_items, 0.0);
  std::vector<int> touched;
  touched.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    // Accumulate <r_i, r_j> over co-raters; ascending user order keeps the
    // summation order identical for (i, j) and (j, i).
    for (const auto& [u, r_ui] : raters[i]) {
      for (const auto& [j, r_uj] : model.profiles_[static_cast<std::size_t>(u)]) {
        if (static_cast<std::size_t>(j) == i) continue;
        if (dot[static_cast<std::size_t>(j)] == 0.0) touched.push_back(j);
        dot[static_cast<std::size_t>(j)] += r_ui * r_uj;
      }
    }

    std::vector<std::pair<int, double>> sims;
    sims.reserve(touched.size());
    for (const int j : touched) {
      const double d = dot[static_cast<std::size_t>(j)];
      dot[static_cast<std::size_t>(j)] = 0.0;
      if (d == 0.0) continue;
      const double denom = norm[i] * norm[static_cast<std::size_t>(j)] + shrink;
      if (denom <= 0.0) continue;
      sims.emplace_back(j, d / denom);
    }
    touched.clear();

    const std::size_t k = std::min<std::size_t>(sims.size(), static_cast<std::size_t>(k_neighbors));
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(),
                      [](const auto& a, const auto& b) {
                        if (a.second != b.second) return a.second > b.second;
                        return a.first < b.first;
                      });
    sims.resize(k);
    std::sort(sims.begin(), sims.end());
    model.neighbors_[i] = std::move(sims);
  }
  return model;
}

double ItemKnnRanker::score(int user, int item) const {
  check_ids(user, item);
  const auto& nbrs = neighbors_[static_cast<std::size_t>(item)];
  if (nbrs.empty()) return 0.0;

  double num = 0.0;
  double den = 0.0;
  // Walk the smaller of (user profile, neighbor list); both are sorted by item.
  const auto& prof = profiles_[static_cast<std::size_t>(user)];
  auto it = nbrs.begin();
  for (const auto& [j, r_uj] : prof) {
    while (it != nbrs.end() && it->first < j) ++it;
    if (it == nbrs.end()) break;
    if (it->first == j) {
      num += it->second * r_uj;
      den += std::abs(it->second);
    }
  }
  return num / (den + 1e-9);
}

double ItemKnnRanker::similarity(int i, int j) const {
  check_ids(0, i);
  check_ids(0, j);
  const auto& nbrs = neighbors_[static_cast<std::size_t>(i)];
  const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), std::make_pair(j, 0.0),
                                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (it != nbrs.end() && it->first == j) return it->second;
  return 0.0;
}

nlohmann::ordered_json ItemKnnRanker::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind());
  j["n_users"] = n_users_;
  j["n_items"] = n_items_;
  j["hyperparams"] = hp_.to_json();
  auto& nbrs = j["neighbors"] = nlohmann::ordered_json::array();
  for (const auto& list : neighbors_) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (const auto& [item, sim] : list) row.push_back(nlohmann::ordered_json::array({item, sim}));
    nbrs.push_back(std::move(row));
  }
  auto& profs = j["profiles"] = nlohmann::ordered_json::array();
  for (const auto& prof : profiles_) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (const auto& [item, rating] : prof) row.push_back(nlohmann::ordered_json::array({item, rating}));
    profs.push_back(std::move(row));
  }
  return j;
}

ItemKnnRanker ItemKnnRanker::from_json(const nlohmann::json& j) {
  ItemKnnRanker model;
  model.n_users_ = j.at("n_users").get<int>();
  model.n_items_ = j.at("n_items").get<int>();
  model.hp_ = HyperParams::from_json(j.at("hyperparams"));
  for (const auto& row : j.at("neighbors")) {
    std::vector<std::pair<int, double>> list;
    list.reserve(row.size());
    for (const auto& e : row) list.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
    model.neighbors_.push_back(std::move(list));
  }
  for (const auto& row : j.at("profiles")) {
    std::vector<std::pair<int, double>> prof;
    prof.reserve(row.size());
    for (const auto& e : row) prof.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
    model.profiles_.push_back(std::move(prof));
  }
  if (model.neighbors_.size() != static_cast<std::size_t>(model.n_items_) ||
      model.profiles_.size() != static_cast<std::size_t>(model.n_users_)) {
    throw ParseError("item similarity model shape mismatch");
  }
  return model;
}

}  // namespace hybridrank
