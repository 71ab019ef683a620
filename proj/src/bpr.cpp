#include "hybridrank/bpr.hpp"

#include <cmath>

#include "hybridrank/rng.hpp"

namespace hybridrank {

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

double sq_norm(std::span<const double> a) { return dot(a, a); }

}  // namespace

double bpr_triple_objective(std::span<const double> p_u, std::span<const double> q_i,
                            std::span<const double> q_j, double b_i, double b_j, double l2) {
  const double x_uij = (b_i + dot(p_u, q_i)) - (b_j + dot(p_u, q_j));
  return log_sigmoid(x_uij) -
         l2 * (sq_norm(p_u) + sq_norm(q_i) + sq_norm(q_j) + b_i * b_i + b_j * b_j);
}

BprTripleGrad bpr_triple_gradient(std::span<const double> p_u, std::span<const double> q_i,
                                  std::span<const double> q_j, double b_i, double b_j, double l2) {
  const std::size_t dim = p_u.size();
  const double x_uij = (b_i + dot(p_u, q_i)) - (b_j + dot(p_u, q_j));
  const double g = 1.0 / (1.0 + std::exp(x_uij));  // sigma(-x_uij)

  BprTripleGrad grad;
  grad.p_u.resize(dim);
  grad.q_i.resize(dim);
  grad.q_j.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    grad.p_u[k] = g * (q_i[k] - q_j[k]) - 2.0 * l2 * p_u[k];
    grad.q_i[k] = g * p_u[k] - 2.0 * l2 * q_i[k];
    grad.q_j[k] = -g * p_u[k] - 2.0 * l2 * q_j[k];
  }
  grad.b_i = g - 2.0 * l2 * b_i;
  grad.b_j = -g - 2.0 * l2 * b_j;
  return grad;
}

BprRanker BprRanker::train(const Dataset& train_data, const HyperParams& hp, std::uint64_t seed,
                           const Dataset* validation) {
  if (hp.embedding_dim <= 0) throw std::invalid_argument("embedding_dim must be positive");
  if (hp.epochs < 0) throw std::invalid_argument("epochs must be non-negative");

  BprRanker model;
  model.n_users_ = train_data.user_count();
  model.n_items_ = train_data.item_count();
  model.hp_ = hp;
  model.seed_ = seed;

  const std::size_t dim = static_cast<std::size_t>(hp.embedding_dim);
  Rng rng(mix_seed(seed, 0x62707275ULL));
  model.user_emb_.resize(static_cast<std::size_t>(model.n_users_) * dim);
  model.item_emb_.resize(static_cast<std::size_t>(model.n_items_) * dim);
  model.item_bias_.assign(static_cast<std::size_t>(model.n_items_), 0.0);
  for (double& w : model.user_emb_) w = rng.normal(0.0, 0.01);
  for (double& w : model.item_emb_) w = rng.normal(0.0, 0.01);

  const auto& rows = train_data.interactions();
  if (rows.empty() || hp.epochs == 0) return model;

  const double lr = hp.learning_rate;
  const double l2 = hp.l2_reg;
  const std::size_t steps = rows.size();

  double best_metric = -1.0;
  std::vector<double> best_user_emb, best_item_emb, best_bias;
  int best_epoch = 0;
  int stalled = 0;

  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    for (std::size_t step = 0; step < steps; ++step) {
      const auto& row = rows[rng.uniform(rows.size())];
      const int u = row.user;
      const int i = row.item;

      // Rejection-sample an item the user never rated in train; skip the
      // update for users that rated everything.
      int j = -1;
      for (int attempt = 0; attempt < 64; ++attempt) {
        const int cand = rng.uniform_int(model.n_items_);
        if (!train_data.contains(u, cand)) {
          j = cand;
          break;
        }
      }
      if (j < 0) continue;

      double* pu = model.user_emb_.data() + static_cast<std::size_t>(u) * dim;
      double* qi = model.item_emb_.data() + static_cast<std::size_t>(i) * dim;
      double* qj = model.item_emb_.data() + static_cast<std::size_t>(j) * dim;
      double& bi = model.item_bias_[static_cast<std::size_t>(i)];
      double& bj = model.item_bias_[static_cast<std::size_t>(j)];

      double x_uij = bi - bj;
      for (std::size_t k = 0; k < dim; ++k) x_uij += pu[k] * (qi[k] - qj[k]);
      const double g = 1.0 / (1.0 + std::exp(x_uij));

      for (std::size_t k = 0; k < dim; ++k) {
        const double pu_k = pu[k];
        pu[k] += lr * (g * (qi[k] - qj[k]) - 2.0 * l2 * pu_k);
        qi[k] += lr * (g * pu_k - 2.0 * l2 * qi[k]);
        qj[k] += lr * (-g * pu_k - 2.0 * l2 * qj[k]);
      }
      bi += lr * (g - 2.0 * l2 * bi);
      bj += lr * (-g - 2.0 * l2 * bj);
    }
    model.trained_epochs_ = epoch;

    if (validation && !validation->empty()) {
      const double metric =
          sampled_pairwise_auc(model, *validation, train_data, mix_seed(seed, 0x76616cULL));
      if (metric > best_metric) {
        best_metric = metric;
        best_user_emb = model.user_emb_;
        best_item_emb = model.item_emb_;
        best_bias = model.item_bias_;
        best_epoch = epoch;
        stalled = 0;
      } else if (++stalled >= hp.early_stop_patience) {
        break;
      }
    }
  }

  if (best_metric >= 0.0) {
    model.user_emb_ = std::move(best_user_emb);
    model.item_emb_ = std::move(best_item_emb);
    model.item_bias_ = std::move(best_bias);
    model.trained_epochs_ = best_epoch;
  }
  return model;
}

std::span<const double> BprRanker::user_vec(int u) const {
  const std::size_t dim = static_cast<std::size_t>(hp_.embedding_dim);
  return {user_emb_.data() + static_cast<std::size_t>(u) * dim, dim};
}

std::span<const double> BprRanker::item_vec(int i) const {
  const std::size_t dim = static_cast<std::size_t>(hp_.embedding_dim);
  return {item_emb_.data() + static_cast<std::size_t>(i) * dim, dim};
}

double BprRanker::score(int user, int item) const {
  check_ids(user, item);
  return item_bias_[static_cast<std::size_t>(item)] + dot(user_vec(user), item_vec(item));
}

nlohmann::ordered_json BprRanker::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind());
  j["n_users"] = n_users_;
  j["n_items"] = n_items_;
  j["seed"] = seed_;
  j["trained_epochs"] = trained_epochs_;
  j["hyperparams"] = hp_.to_json();
  j["user_emb"] = user_emb_;
  j["item_emb"] = item_emb_;
  j["item_bias"] = item_bias_;
  return j;
}

BprRanker BprRanker::from_json(const nlohmann::json& j) {
  BprRanker model;
  model.n_users_ = j.at("n_users").get<int>();
  model.n_items_ = j.at("n_items").get<int>();
  model.seed_ = j.at("seed").get<std::uint64_t>();
  model.trained_epochs_ = j.at("trained_epochs").get<int>();
  model.hp_ = HyperParams::from_json(j.at("hyperparams"));
  model.user_emb_ = j.at("user_emb").get<std::vector<double>>();
  model.item_emb_ = j.at("item_emb").get<std::vector<double>>();
  model.item_bias_ = j.at("item_bias").get<std::vector<double>>();
  const std::size_t dim = static_cast<std::size_t>(model.hp_.embedding_dim);
  if (model.user_emb_.size() != static_cast<std::size_t>(model.n_users_) * dim ||
      model.item_emb_.size() != static_cast<std::size_t>(model.n_items_) * dim ||
      model.item_bias_.size() != static_cast<std::size_t>(model.n_items_)) {
    throw ParseError("factor model shape mismatch");
  }
  return model;
}

}  // namespace hybridrank
