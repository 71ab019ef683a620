#include "hybridrank/ncf.hpp"

#include <cmath>

#include "hybridrank/bpr.hpp"  // log_sigmoid
#include "hybridrank/rng.hpp"

namespace hybridrank {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Forward {
  std::vector<std::vector<double>> pre;  // z per hidden layer
  std::vector<std::vector<double>> act;  // post-ReLU (and dropout) per hidden layer
  double logit = 0.0;
};

// masks, when given, hold the per-unit inverted-dropout factors (0 or 1/keep).
void forward_pass(const NcfNet& net, std::span<const double> input,
                  const std::vector<std::vector<double>>* masks, Forward& f) {
  const std::size_t n_layers = net.hidden.size();
  f.pre.resize(n_layers);
  f.act.resize(n_layers);
  std::span<const double> prev = input;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t rows = static_cast<std::size_t>(net.hidden[l]);
    const std::size_t cols = prev.size();
    f.pre[l].assign(rows, 0.0);
    f.act[l].assign(rows, 0.0);
    const double* w = net.weights[l].data();
    for (std::size_t r = 0; r < rows; ++r) {
      double z = net.biases[l][r];
      const double* wr = w + r * cols;
      for (std::size_t c = 0; c < cols; ++c) z += wr[c] * prev[c];
      f.pre[l][r] = z;
      double a = z > 0.0 ? z : 0.0;
      if (masks) a *= (*masks)[l][r];
      f.act[l][r] = a;
    }
    prev = f.act[l];
  }
  double z = net.out_bias;
  for (std::size_t c = 0; c < prev.size(); ++c) z += net.out_weights[c] * prev[c];
  f.logit = z;
}

}  // namespace

NcfNet NcfNet::zeros(int input_dim, const std::vector<int>& hidden) {
  NcfNet net;
  net.input_dim = input_dim;
  net.hidden = hidden;
  int prev = input_dim;
  for (const int width : hidden) {
    if (width <= 0) throw std::invalid_argument("hidden layer width must be positive");
    net.weights.emplace_back(static_cast<std::size_t>(width) * static_cast<std::size_t>(prev), 0.0);
    net.biases.emplace_back(static_cast<std::size_t>(width), 0.0);
    prev = width;
  }
  net.out_weights.assign(static_cast<std::size_t>(prev), 0.0);
  return net;
}

double NcfNet::logit(std::span<const double> input) const {
  Forward f;
  forward_pass(*this, input, nullptr, f);
  return f.logit;
}

double ncf_example_loss(const NcfNet& net, std::span<const double> p_u,
                        std::span<const double> q_i, double label, double l2) {
  std::vector<double> input(p_u.begin(), p_u.end());
  input.insert(input.end(), q_i.begin(), q_i.end());
  const double z = net.logit(input);
  double loss = -(label * log_sigmoid(z) + (1.0 - label) * log_sigmoid(-z));

  double reg = 0.0;
  const auto add_sq = [&reg](std::span<const double> v) {
    for (const double x : v) reg += x * x;
  };
  add_sq(p_u);
  add_sq(q_i);
  for (const auto& w : net.weights) add_sq(w);
  for (const auto& b : net.biases) add_sq(b);
  add_sq(net.out_weights);
  reg += net.out_bias * net.out_bias;
  return loss + l2 * reg;
}

NcfExampleGrad ncf_example_gradient(const NcfNet& net, std::span<const double> p_u,
                                    std::span<const double> q_i, double label, double l2) {
  std::vector<double> input(p_u.begin(), p_u.end());
  input.insert(input.end(), q_i.begin(), q_i.end());

  Forward f;
  forward_pass(net, input, nullptr, f);
  const double dz = sigmoid(f.logit) - label;

  NcfExampleGrad grad;
  grad.net = NcfNet::zeros(net.input_dim, net.hidden);

  const std::size_t n_layers = net.hidden.size();
  std::span<const double> last = n_layers ? std::span<const double>(f.act[n_layers - 1])
                                          : std::span<const double>(input);
  for (std::size_t c = 0; c < last.size(); ++c) {
    grad.net.out_weights[c] = dz * last[c] + 2.0 * l2 * net.out_weights[c];
  }
  grad.net.out_bias = dz + 2.0 * l2 * net.out_bias;

  // delta = d(loss)/d(activation) walked back layer by layer.
  std::vector<double> delta(net.out_weights.size());
  for (std::size_t c = 0; c < delta.size(); ++c) delta[c] = dz * net.out_weights[c];

  for (std::size_t l = n_layers; l-- > 0;) {
    const std::size_t rows = static_cast<std::size_t>(net.hidden[l]);
    std::span<const double> below = l == 0 ? std::span<const double>(input)
                                           : std::span<const double>(f.act[l - 1]);
    const std::size_t cols = below.size();
    std::vector<double> delta_below(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double dzr = f.pre[l][r] > 0.0 ? delta[r] : 0.0;
      const double* wr = net.weights[l].data() + r * cols;
      double* gr = grad.net.weights[l].data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) {
        gr[c] = dzr * below[c];
        delta_below[c] += dzr * wr[c];
      }
      grad.net.biases[l][r] = dzr;
    }
    delta = std::move(delta_below);
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    for (std::size_t k = 0; k < net.weights[l].size(); ++k) {
      grad.net.weights[l][k] += 2.0 * l2 * net.weights[l][k];
    }
    for (std::size_t k = 0; k < net.biases[l].size(); ++k) {
      grad.net.biases[l][k] += 2.0 * l2 * net.biases[l][k];
    }
  }

  const std::size_t dim = p_u.size();
  grad.p_u.assign(dim, 0.0);
  grad.q_i.assign(q_i.size(), 0.0);
  for (std::size_t k = 0; k < dim; ++k) grad.p_u[k] = delta[k] + 2.0 * l2 * p_u[k];
  for (std::size_t k = 0; k < q_i.size(); ++k) grad.q_i[k] = delta[dim + k] + 2.0 * l2 * q_i[k];
  return grad;
}

NcfRanker NcfRanker::train(const Dataset& train_data, const HyperParams& hp, std::uint64_t seed,
                           const Dataset* validation) {
  if (hp.embedding_dim <= 0) throw std::invalid_argument("embedding_dim must be positive");
  if (hp.dropout < 0.0 || hp.dropout >= 1.0) throw std::invalid_argument("dropout must be in [0, 1)");
  if (hp.negatives_per_positive < 0) {
    throw std::invalid_argument("negatives_per_positive must be non-negative");
  }

  NcfRanker model;
  model.n_users_ = train_data.user_count();
  model.n_items_ = train_data.item_count();
  model.hp_ = hp;
  model.seed_ = seed;

  const std::size_t dim = static_cast<std::size_t>(hp.embedding_dim);
  Rng rng(mix_seed(seed, 0x6e6366ULL));
  model.user_emb_.resize(static_cast<std::size_t>(model.n_users_) * dim);
  model.item_emb_.resize(static_cast<std::size_t>(model.n_items_) * dim);
  for (double& w : model.user_emb_) w = rng.normal(0.0, 0.01);
  for (double& w : model.item_emb_) w = rng.normal(0.0, 0.01);

  model.net_ = NcfNet::zeros(2 * hp.embedding_dim, hp.mlp_hidden);
  int prev = model.net_.input_dim;
  for (std::size_t l = 0; l < model.net_.weights.size(); ++l) {
    const double scale = std::sqrt(2.0 / static_cast<double>(prev));
    for (double& w : model.net_.weights[l]) w = rng.normal(0.0, scale);
    prev = model.net_.hidden[l];
  }
  const double out_scale = std::sqrt(1.0 / static_cast<double>(prev));
  for (double& w : model.net_.out_weights) w = rng.normal(0.0, out_scale);

  const auto& rows = train_data.interactions();
  if (rows.empty() || hp.epochs == 0) return model;

  const double lr = hp.learning_rate;
  const double l2 = hp.l2_reg;
  const double keep = 1.0 - hp.dropout;
  const std::size_t n_layers = model.net_.hidden.size();

  std::vector<std::vector<double>> masks(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    masks[l].assign(static_cast<std::size_t>(model.net_.hidden[l]), 1.0);
  }

  Forward f;
  std::vector<double> input(static_cast<std::size_t>(model.net_.input_dim));
  std::vector<std::size_t> order(rows.size());

  const auto sgd_step = [&](int u, int i, double label) {
    double* pu = model.user_emb_.data() + static_cast<std::size_t>(u) * dim;
    double* qi = model.item_emb_.data() + static_cast<std::size_t>(i) * dim;
    for (std::size_t k = 0; k < dim; ++k) {
      input[k] = pu[k];
      input[dim + k] = qi[k];
    }

    const bool use_dropout = hp.dropout > 0.0;
    if (use_dropout) {
      for (std::size_t l = 0; l < n_layers; ++l) {
        for (double& m : masks[l]) m = rng.bernoulli(hp.dropout) ? 0.0 : 1.0 / keep;
      }
    }
    forward_pass(model.net_, input, use_dropout ? &masks : nullptr, f);
    const double dz = sigmoid(f.logit) - label;

    std::span<const double> last =
        n_layers ? std::span<const double>(f.act[n_layers - 1]) : std::span<const double>(input);
    std::vector<double> delta(model.net_.out_weights.size());
    for (std::size_t c = 0; c < delta.size(); ++c) delta[c] = dz * model.net_.out_weights[c];
    for (std::size_t c = 0; c < last.size(); ++c) {
      model.net_.out_weights[c] -= lr * (dz * last[c] + 2.0 * l2 * model.net_.out_weights[c]);
    }
    model.net_.out_bias -= lr * (dz + 2.0 * l2 * model.net_.out_bias);

    for (std::size_t l = n_layers; l-- > 0;) {
      const std::size_t n_rows = static_cast<std::size_t>(model.net_.hidden[l]);
      std::span<const double> below =
          l == 0 ? std::span<const double>(input) : std::span<const double>(f.act[l - 1]);
      const std::size_t cols = below.size();
      std::vector<double> delta_below(cols, 0.0);
      for (std::size_t r = 0; r < n_rows; ++r) {
        double dzr = delta[r];
        if (use_dropout) dzr *= masks[l][r];
        if (f.pre[l][r] <= 0.0) dzr = 0.0;
        double* wr = model.net_.weights[l].data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
          delta_below[c] += dzr * wr[c];
          wr[c] -= lr * (dzr * below[c] + 2.0 * l2 * wr[c]);
        }
        model.net_.biases[l][r] -= lr * (dzr + 2.0 * l2 * model.net_.biases[l][r]);
      }
      delta = std::move(delta_below);
    }
    for (std::size_t k = 0; k < dim; ++k) {
      const double gp = delta[k] + 2.0 * l2 * pu[k];
      const double gq = delta[dim + k] + 2.0 * l2 * qi[k];
      pu[k] -= lr * gp;
      qi[k] -= lr * gq;
    }
  };

  double best_metric = -1.0;
  NcfRanker best;
  int stalled = 0;

  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    rng.shuffle(order);
    for (const std::size_t idx : order) {
      const auto& row = rows[idx];
      sgd_step(row.user, row.item, 1.0);
      for (int t = 0; t < hp.negatives_per_positive; ++t) {
        int j = -1;
        for (int attempt = 0; attempt < 64; ++attempt) {
          const int cand = rng.uniform_int(model.n_items_);
          if (!train_data.contains(row.user, cand)) {
            j = cand;
            break;
          }
        }
        if (j >= 0) sgd_step(row.user, j, 0.0);
      }
    }
    model.trained_epochs_ = epoch;

    if (validation && !validation->empty()) {
      const double metric =
          sampled_pairwise_auc(model, *validation, train_data, mix_seed(seed, 0x76616cULL));
      if (metric > best_metric) {
        best_metric = metric;
        best = model;
        stalled = 0;
      } else if (++stalled >= hp.early_stop_patience) {
        break;
      }
    }
  }

  if (best_metric >= 0.0) return best;
  return model;
}

double NcfRanker::score(int user, int item) const {
  check_ids(user, item);
  const std::size_t dim = static_cast<std::size_t>(hp_.embedding_dim);
  std::vector<double> input(2 * dim);
  const double* pu = user_emb_.data() + static_cast<std::size_t>(user) * dim;
  const double* qi = item_emb_.data() + static_cast<std::size_t>(item) * dim;
  for (std::size_t k = 0; k < dim; ++k) {
    input[k] = pu[k];
    input[dim + k] = qi[k];
  }
  return sigmoid(net_.logit(input));
}

nlohmann::ordered_json NcfRanker::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind());
  j["n_users"] = n_users_;
  j["n_items"] = n_items_;
  j["seed"] = seed_;
  j["trained_epochs"] = trained_epochs_;
  j["hyperparams"] = hp_.to_json();
  j["user_emb"] = user_emb_;
  j["item_emb"] = item_emb_;
  j["weights"] = net_.weights;
  j["biases"] = net_.biases;
  j["out_weights"] = net_.out_weights;
  j["out_bias"] = net_.out_bias;
  return j;
}

NcfRanker NcfRanker::from_json(const nlohmann::json& j) {
  NcfRanker model;
  model.n_users_ = j.at("n_users").get<int>();
  model.n_items_ = j.at("n_items").get<int>();
  model.seed_ = j.at("seed").get<std::uint64_t>();
  model.trained_epochs_ = j.at("trained_epochs").get<int>();
  model.hp_ = HyperParams::from_json(j.at("hyperparams"));
  model.user_emb_ = j.at("user_emb").get<std::vector<double>>();
  model.item_emb_ = j.at("item_emb").get<std::vector<double>>();
  model.net_ = NcfNet::zeros(2 * model.hp_.embedding_dim, model.hp_.mlp_hidden);
  model.net_.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  model.net_.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  model.net_.out_weights = j.at("out_weights").get<std::vector<double>>();
  model.net_.out_bias = j.at("out_bias").get<double>();
  const std::size_t dim = static_cast<std::size_t>(model.hp_.embedding_dim);
  if (model.user_emb_.size() != static_cast<std::size_t>(model.n_users_) * dim ||
      model.item_emb_.size() != static_cast<std::size_t>(model.n_items_) * dim) {
    throw ParseError("neural model shape mismatch");
  }
  return model;
}

}  // namespace hybridrank
