#include "hybridrank/config.hpp"

#include <fstream>
#include <set>

namespace hybridrank {

namespace {

// Tracks a JSON object while it is consumed so unknown keys surface with
// their full dotted path.
class ObjectReader {
public:
  ObjectReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "must be an object");
  }

  ~ObjectReader() = default;

  void finish() {
    for (const auto& [key, value] : j_.items()) {
      if (!taken_.count(key)) throw ConfigError(join(key), "unknown key");
    }
  }

  bool has(const std::string& key) {
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const nlohmann::json* take(const std::string& key) {
    taken_.insert(key);
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const nlohmann::json* v = take(key);
    if (!v) return;
    try {
      out = v->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(join(key), "has the wrong type");
    }
  }

  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> taken_;
};

void require_range(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string to_string(MergeMode mode) {
  return mode == MergeMode::evaluation ? "evaluation" : "deployment";
}

std::string to_string(CandidateSource source) {
  return source == CandidateSource::test_items ? "test" : "rs_top_n";
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["dataset"] = {{"path", dataset.path},
                  {"format", to_string(dataset.format)},
                  {"min_interactions", dataset.min_interactions}};
  j["split"] = {{"ratios", split.ratios}, {"seed", split.seed}};
  j["model"] = {{"kind", to_string(model.kind)},
                {"grid_search", model.grid_search},
                {"hyperparams", model.hp.to_json()}};
  nlohmann::ordered_json thr{{"t_p", thresholds.t_p},
                             {"n_sampled_negatives", thresholds.n_sampled_negatives}};
  if (thresholds.t_s) thr["t_s"] = *thresholds.t_s;
  if (thresholds.relevance_cutoff) thr["relevance_cutoff"] = *thresholds.relevance_cutoff;
  j["thresholds"] = std::move(thr);
  nlohmann::ordered_json llm_j{{"mode", llm.use_mock ? "mock" : "endpoint"},
                               {"history_cap", llm.history_cap},
                               {"candidates", to_string(llm.candidates)},
                               {"rs_top_n", llm.rs_top_n},
                               {"per_query_seconds", llm.per_query_seconds}};
  if (llm.use_mock) {
    llm_j["mock"] = {{"kind", to_string(llm.mock_kind)},
                     {"noise_p", llm.noise_p},
                     {"hallucination_count", llm.hallucination_count}};
  } else {
    llm_j["endpoint"] = {{"base_url", llm.endpoint.base_url},
                         {"model_name", llm.endpoint.model_name},
                         {"temperature", llm.endpoint.temperature},
                         {"timeout_seconds", llm.endpoint.timeout_seconds},
                         {"max_concurrency", llm.endpoint.max_concurrency},
                         {"max_attempts", llm.endpoint.retry.max_attempts},
                         {"backoff_base_seconds", llm.endpoint.retry.backoff_base_seconds}};
  }
  j["llm"] = std::move(llm_j);
  j["merge_mode"] = to_string(merge_mode);
  j["output_dir"] = output_dir;
  j["seeds"] = {{"train", seeds.train}, {"shuffle", seeds.shuffle}, {"negatives", seeds.negatives}};
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& root) {
  RunConfig cfg;
  ObjectReader top(root, "");

  {
    const nlohmann::json* ds = top.take("dataset");
    if (!ds) throw ConfigError("dataset", "is required");
    ObjectReader r(*ds, "dataset");
    r.read("path", cfg.dataset.path);
    if (cfg.dataset.path.empty()) throw ConfigError("dataset.path", "is required");
    std::string format;
    r.read("format", format);
    if (format.empty()) throw ConfigError("dataset.format", "is required");
    try {
      cfg.dataset.format = dataset_format_from_string(format);
    } catch (const ParseError&) {
      throw ConfigError("dataset.format", "must be ml100k, ml1m, or bookcrossing");
    }
    long long min_inter = static_cast<long long>(cfg.dataset.min_interactions);
    r.read("min_interactions", min_inter);
    require_range(min_inter >= 0, "dataset.min_interactions", "must be non-negative");
    cfg.dataset.min_interactions = static_cast<std::size_t>(min_inter);
    r.finish();
  }

  if (const nlohmann::json* sp = top.take("split")) {
    ObjectReader r(*sp, "split");
    r.read("ratios", cfg.split.ratios);
    r.read("seed", cfg.split.seed);
    r.finish();
    double sum = 0.0;
    for (const double x : cfg.split.ratios) {
      require_range(x >= 0.0, "split.ratios", "entries must be non-negative");
      sum += x;
    }
    require_range(std::abs(sum - 1.0) <= 1e-9, "split.ratios", "must sum to 1");
    require_range(cfg.split.ratios[0] > 0.0, "split.ratios", "train share must be positive");
  }

  {
    const nlohmann::json* mj = top.take("model");
    if (!mj) throw ConfigError("model", "is required");
    ObjectReader r(*mj, "model");
    std::string kind;
    r.read("kind", kind);
    if (kind.empty()) throw ConfigError("model.kind", "is required");
    try {
      cfg.model.kind = ranker_kind_from_string(kind);
    } catch (const ParseError&) {
      throw ConfigError("model.kind", "must be itemknn, bpr, or ncf");
    }
    r.read("grid_search", cfg.model.grid_search);
    if (const nlohmann::json* hj = r.take("hyperparams")) {
      ObjectReader h(*hj, "model.hyperparams");
      h.read("learning_rate", cfg.model.hp.learning_rate);
      h.read("epochs", cfg.model.hp.epochs);
      h.read("embedding_dim", cfg.model.hp.embedding_dim);
      h.read("mlp_hidden", cfg.model.hp.mlp_hidden);
      h.read("dropout", cfg.model.hp.dropout);
      h.read("k_neighbors", cfg.model.hp.k_neighbors);
      h.read("shrink", cfg.model.hp.shrink);
      h.read("l2_reg", cfg.model.hp.l2_reg);
      h.read("negatives_per_positive", cfg.model.hp.negatives_per_positive);
      h.read("early_stop_patience", cfg.model.hp.early_stop_patience);
      h.finish();
      const auto& hp = cfg.model.hp;
      require_range(hp.learning_rate > 0.0, "model.hyperparams.learning_rate", "must be positive");
      require_range(hp.epochs >= 0, "model.hyperparams.epochs", "must be non-negative");
      require_range(hp.embedding_dim > 0, "model.hyperparams.embedding_dim", "must be positive");
      require_range(hp.dropout >= 0.0 && hp.dropout < 1.0, "model.hyperparams.dropout",
                    "must be in [0, 1)");
      require_range(hp.k_neighbors > 0, "model.hyperparams.k_neighbors", "must be positive");
      require_range(hp.shrink >= 0.0, "model.hyperparams.shrink", "must be non-negative");
      require_range(hp.l2_reg >= 0.0, "model.hyperparams.l2_reg", "must be non-negative");
      require_range(hp.negatives_per_positive >= 0,
                    "model.hyperparams.negatives_per_positive", "must be non-negative");
      require_range(hp.early_stop_patience > 0, "model.hyperparams.early_stop_patience",
                    "must be positive");
      for (const int w : hp.mlp_hidden) {
        require_range(w > 0, "model.hyperparams.mlp_hidden", "widths must be positive");
      }
    }
    r.finish();
  }

  if (const nlohmann::json* tj = top.take("thresholds")) {
    ObjectReader r(*tj, "thresholds");
    r.read("t_p", cfg.thresholds.t_p);
    if (r.has("t_s")) {
      double t_s = 0.0;
      r.read("t_s", t_s);
      cfg.thresholds.t_s = t_s;
    } else {
      r.take("t_s");
    }
    if (r.has("relevance_cutoff")) {
      double cutoff = 0.0;
      r.read("relevance_cutoff", cutoff);
      cfg.thresholds.relevance_cutoff = cutoff;
    } else {
      r.take("relevance_cutoff");
    }
    r.read("n_sampled_negatives", cfg.thresholds.n_sampled_negatives);
    r.finish();
    require_range(cfg.thresholds.t_p >= 0.0 && cfg.thresholds.t_p < 1.0, "thresholds.t_p",
                  "must be in [0, 1)");
    if (cfg.thresholds.t_s) {
      require_range(*cfg.thresholds.t_s > 0.0 && *cfg.thresholds.t_s < 1.0, "thresholds.t_s",
                    "must be in (0, 1)");
    }
    require_range(cfg.thresholds.n_sampled_negatives >= 0, "thresholds.n_sampled_negatives",
                  "must be non-negative");
  }

  if (const nlohmann::json* lj = top.take("llm")) {
    ObjectReader r(*lj, "llm");
    std::string mode = "mock";
    r.read("mode", mode);
    if (mode == "mock") {
      cfg.llm.use_mock = true;
    } else if (mode == "endpoint") {
      cfg.llm.use_mock = false;
    } else {
      throw ConfigError("llm.mode", "must be mock or endpoint");
    }
    if (const nlohmann::json* mj = r.take("mock")) {
      ObjectReader m(*mj, "llm.mock");
      std::string kind = to_string(cfg.llm.mock_kind);
      m.read("kind", kind);
      try {
        cfg.llm.mock_kind = mock_kind_from_string(kind);
      } catch (const ParseError&) {
        throw ConfigError("llm.mock.kind", "must be oracle, noisy_oracle, echo, or hallucinating");
      }
      m.read("noise_p", cfg.llm.noise_p);
      m.read("hallucination_count", cfg.llm.hallucination_count);
      m.finish();
      require_range(cfg.llm.noise_p >= 0.0 && cfg.llm.noise_p <= 1.0, "llm.mock.noise_p",
                    "must be in [0, 1]");
      require_range(cfg.llm.hallucination_count >= 0, "llm.mock.hallucination_count",
                    "must be non-negative");
    }
    if (const nlohmann::json* ej = r.take("endpoint")) {
      ObjectReader e(*ej, "llm.endpoint");
      e.read("base_url", cfg.llm.endpoint.base_url);
      e.read("model_name", cfg.llm.endpoint.model_name);
      e.read("temperature", cfg.llm.endpoint.temperature);
      e.read("timeout_seconds", cfg.llm.endpoint.timeout_seconds);
      e.read("max_concurrency", cfg.llm.endpoint.max_concurrency);
      e.read("max_attempts", cfg.llm.endpoint.retry.max_attempts);
      e.read("backoff_base_seconds", cfg.llm.endpoint.retry.backoff_base_seconds);
      e.finish();
      require_range(cfg.llm.endpoint.timeout_seconds > 0.0, "llm.endpoint.timeout_seconds",
                    "must be positive");
      require_range(cfg.llm.endpoint.max_concurrency > 0, "llm.endpoint.max_concurrency",
                    "must be positive");
      require_range(cfg.llm.endpoint.retry.max_attempts > 0, "llm.endpoint.max_attempts",
                    "must be positive");
      require_range(cfg.llm.endpoint.retry.backoff_base_seconds >= 0.0,
                    "llm.endpoint.backoff_base_seconds", "must be non-negative");
    }
    if (!cfg.llm.use_mock && cfg.llm.endpoint.base_url.empty()) {
      throw ConfigError("llm.endpoint.base_url", "is required in endpoint mode");
    }
    r.read("history_cap", cfg.llm.history_cap);
    std::string candidates = to_string(cfg.llm.candidates);
    r.read("candidates", candidates);
    if (candidates == "test") {
      cfg.llm.candidates = CandidateSource::test_items;
    } else if (candidates == "rs_top_n") {
      cfg.llm.candidates = CandidateSource::rs_top_n;
    } else {
      throw ConfigError("llm.candidates", "must be test or rs_top_n");
    }
    r.read("rs_top_n", cfg.llm.rs_top_n);
    r.read("per_query_seconds", cfg.llm.per_query_seconds);
    r.finish();
    require_range(cfg.llm.history_cap > 0, "llm.history_cap", "must be positive");
    require_range(cfg.llm.rs_top_n > 0, "llm.rs_top_n", "must be positive");
    require_range(cfg.llm.per_query_seconds > 0.0, "llm.per_query_seconds", "must be positive");
  }

  if (const nlohmann::json* mm = top.take("merge_mode")) {
    const std::string mode = mm->is_string() ? mm->get<std::string>() : "";
    if (mode == "evaluation") {
      cfg.merge_mode = MergeMode::evaluation;
    } else if (mode == "deployment") {
      cfg.merge_mode = MergeMode::deployment;
    } else {
      throw ConfigError("merge_mode", "must be evaluation or deployment");
    }
  }

  top.read("output_dir", cfg.output_dir);
  if (cfg.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");

  if (const nlohmann::json* sj = top.take("seeds")) {
    ObjectReader r(*sj, "seeds");
    r.read("train", cfg.seeds.train);
    r.read("shuffle", cfg.seeds.shuffle);
    r.read("negatives", cfg.seeds.negatives);
    r.finish();
  }

  top.finish();
  return cfg;
}

RunConfig RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return from_json(j);
}

void RunConfig::override_seed(std::uint64_t seed) {
  split.seed = seed;
  seeds.train = seed;
  seeds.shuffle = seed;
  seeds.negatives = seed;
}

std::uint64_t RunConfig::model_cache_key() const {
  nlohmann::ordered_json j;
  j["dataset"] = {{"path", dataset.path},
                  {"format", to_string(dataset.format)},
                  {"min_interactions", dataset.min_interactions}};
  j["split"] = {{"ratios", split.ratios}, {"seed", split.seed}};
  j["model"] = {{"kind", to_string(model.kind)},
                {"grid_search", model.grid_search},
                {"hyperparams", model.hp.to_json()}};
  j["train_seed"] = seeds.train;
  return fnv1a(j.dump());
}

std::uint64_t RunConfig::config_hash() const { return fnv1a(to_json().dump()); }

}  // namespace hybridrank
