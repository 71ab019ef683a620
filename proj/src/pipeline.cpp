#include "hybridrank/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "hybridrank/bpr.hpp"
#include "hybridrank/instruction.hpp"
#include "hybridrank/itemknn.hpp"
#include "hybridrank/llm_client.hpp"
#include "hybridrank/metrics.hpp"
#include "hybridrank/mock_llm.hpp"
#include "hybridrank/ncf.hpp"
#include "hybridrank/response_parser.hpp"
#include "hybridrank/rng.hpp"

namespace fs = std::filesystem;

namespace hybridrank {

namespace {

// Config mistakes keep their type (and exit code) even when detected deep in
// a stage; everything else is tagged with the stage it broke in.
template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, std::string(name) + ": " + e.what());
  }
}

void logln(std::ostream* log, const std::string& line) {
  if (log) *log << line << '\n';
}

std::string hex16(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setfill('0') << std::setw(16) << v;
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
  if (!out) throw ParseError("short write to " + path.string());
}

std::pair<std::string, std::string> dataset_files(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::ml100k: return {"u.data", "u.item"};
    case DatasetFormat::ml1m: return {"ratings.dat", "movies.dat"};
    case DatasetFormat::bookcrossing: return {"BX-Book-Ratings.csv", "BX-Books.csv"};
  }
  throw ParseError("unknown dataset format");
}

struct Context {
  RunConfig cfg;
  IngestSummary ingest;
  Dataset raw;
  Dataset full;  // filtered
  SplitDataset split;
  std::unique_ptr<Ranker> model;
  bool cache_hit = false;
  int grid_tried = 1;
  Thresholds thr;
  std::vector<UserAssessment> assessments;
  Classification cls;
};

Dataset ingest_dataset(const RunConfig& cfg, IngestSummary& summary, std::ostream* log) {
  const auto [ratings_name, catalog_name] = dataset_files(cfg.dataset.format);
  const fs::path dir = cfg.dataset.path;
  const fs::path ratings_path = dir / ratings_name;
  if (!fs::exists(ratings_path)) {
    throw ParseError("ratings file not found: " + ratings_path.string() +
                     " (fetch the dataset first; see scripts/)");
  }
  ItemCatalog catalog;
  const ItemCatalog* catalog_ptr = nullptr;
  const fs::path catalog_path = dir / catalog_name;
  if (fs::exists(catalog_path)) {
    catalog = load_item_catalog(catalog_path, cfg.dataset.format);
    catalog_ptr = &catalog;
  } else {
    logln(log, "[ingest] no catalog at " + catalog_path.string() + ", using fallback titles");
  }
  Dataset data = load_ratings_file(ratings_path, cfg.dataset.format, catalog_ptr, summary);
  logln(log, "[ingest] users=" + std::to_string(summary.users) + " items=" +
                 std::to_string(summary.items) + " interactions=" +
                 std::to_string(summary.interactions) + " duplicates_dropped=" +
                 std::to_string(summary.duplicates_dropped));
  return data;
}

std::vector<HyperParams> grid_points(RankerKind kind, const HyperParams& base) {
  std::vector<HyperParams> out;
  switch (kind) {
    case RankerKind::itemknn:
      for (const int k : {10, 50, 100, 200, 250, 300, 400}) {
        for (const double s : {0.0, 0.1, 0.5, 1.0, 2.0}) {
          HyperParams hp = base;
          hp.k_neighbors = k;
          hp.shrink = s;
          out.push_back(hp);
        }
      }
      break;
    case RankerKind::bpr:
      for (const double lr : {5e-5, 1e-4, 5e-4, 7e-4, 1e-3, 5e-3, 7e-3}) {
        HyperParams hp = base;
        hp.learning_rate = lr;
        out.push_back(hp);
      }
      break;
    case RankerKind::ncf:
      for (const double lr : {5e-7, 1e-6, 5e-6, 1e-5, 1e-4, 1e-3}) {
        for (const double d : {0.0, 0.1, 0.3}) {
          HyperParams hp = base;
          hp.learning_rate = lr;
          hp.dropout = d;
          out.push_back(hp);
        }
      }
      break;
  }
  return out;
}

std::unique_ptr<Ranker> train_one(RankerKind kind, const SplitDataset& split,
                                  const HyperParams& hp, std::uint64_t seed) {
  const Dataset* val = split.validation.empty() ? nullptr : &split.validation;
  switch (kind) {
    case RankerKind::itemknn:
      return std::make_unique<ItemKnnRanker>(
          ItemKnnRanker::train(split.train, hp.k_neighbors, hp.shrink));
    case RankerKind::bpr:
      return std::make_unique<BprRanker>(BprRanker::train(split.train, hp, seed, val));
    case RankerKind::ncf:
      return std::make_unique<NcfRanker>(NcfRanker::train(split.train, hp, seed, val));
  }
  throw ParseError("unknown model kind");
}

fs::path model_cache_path(const RunConfig& cfg) {
  return fs::path(cfg.output_dir) / "cache" / ("model_" + hex16(cfg.model_cache_key()) + ".json");
}

void obtain_model(Context& ctx, std::ostream* log) {
  const fs::path cache = model_cache_path(ctx.cfg);
  if (fs::exists(cache)) {
    try {
      auto model = load_ranker_file(cache);
      if (model->kind() == ctx.cfg.model.kind &&
          model->user_count() == ctx.full.user_count() &&
          model->item_count() == ctx.full.item_count()) {
        ctx.model = std::move(model);
        ctx.cache_hit = true;
        logln(log, "[train] model cache hit: " + cache.string());
        return;
      }
      logln(log, "[train] cached model does not fit this config, retraining");
    } catch (const std::exception& e) {
      logln(log, std::string("[train] cache unreadable (") + e.what() + "), retraining");
    }
  }

  const RankerKind kind = ctx.cfg.model.kind;
  if (ctx.cfg.model.grid_search) {
    if (ctx.split.validation.empty()) {
      throw ParseError("grid search needs a validation split");
    }
    const auto grid = grid_points(kind, ctx.cfg.model.hp);
    ctx.grid_tried = static_cast<int>(grid.size());
    const std::uint64_t metric_seed = mix_seed(ctx.cfg.seeds.train, 0x67726964ULL);
    double best_metric = -1.0;
    std::unique_ptr<Ranker> best;
    for (const auto& hp : grid) {
      auto model = train_one(kind, ctx.split, hp, ctx.cfg.seeds.train);
      const double metric =
          sampled_pairwise_auc(*model, ctx.split.validation, ctx.split.train, metric_seed);
      if (metric > best_metric) {
        best_metric = metric;
        best = std::move(model);
      }
    }
    logln(log, "[train] grid search tried " + std::to_string(ctx.grid_tried) +
                   " configs, best validation score " + std::to_string(best_metric));
    ctx.model = std::move(best);
  } else {
    ctx.model = train_one(kind, ctx.split, ctx.cfg.model.hp, ctx.cfg.seeds.train);
  }
  save_ranker(*ctx.model, (fs::create_directories(cache.parent_path()), cache));
  logln(log, "[train] model trained and cached: " + cache.string());
}

Thresholds resolve_thresholds(const RunConfig& cfg, const Dataset& full) {
  Thresholds thr;
  thr.t_p = cfg.thresholds.t_p;
  thr.n_sampled_negatives = cfg.thresholds.n_sampled_negatives;
  thr.t_s = cfg.thresholds.t_s ? *cfg.thresholds.t_s : mean_sparsity_threshold(full);
  const RatingScale scale = full.vocab().scale;
  thr.relevance_cutoff = cfg.thresholds.relevance_cutoff
                             ? *cfg.thresholds.relevance_cutoff
                             : default_relevance_cutoff(scale);
  if (thr.relevance_cutoff < scale.min || thr.relevance_cutoff > scale.max) {
    throw ConfigError("thresholds.relevance_cutoff", "outside the rating scale");
  }
  return thr;
}

// Stages shared by every command: ingest -> filter -> split -> train ->
// assess -> classify.
Context prepare(const RunConfig& cfg, std::ostream* log) {
  Context ctx;
  ctx.cfg = cfg;
  ctx.raw = stage("ingest", [&] { return ingest_dataset(cfg, ctx.ingest, log); });
  ctx.full = stage("filter", [&] {
    return filter_min_interactions(ctx.raw, cfg.dataset.min_interactions);
  });
  ctx.split = stage("split", [&] {
    return split_per_user(ctx.full, cfg.split.ratios, cfg.split.seed);
  });
  stage("train", [&] { obtain_model(ctx, log); });
  ctx.thr = stage("assess", [&] { return resolve_thresholds(cfg, ctx.full); });
  ctx.assessments = stage("assess", [&] {
    return assess_users(ctx.split, ctx.full, *ctx.model, ctx.thr, cfg.seeds.negatives);
  });
  ctx.cls = stage("classify", [&] { return classify_users(ctx.assessments, ctx.thr); });
  logln(log, "[classify] weak=" + std::to_string(ctx.cls.weak.size()) + " strong=" +
                 std::to_string(ctx.cls.strong.size()) + " (t_s=" + std::to_string(ctx.thr.t_s) +
                 ")");
  return ctx;
}

std::string llm_kind_name(const RunConfig& cfg) {
  if (cfg.llm.use_mock) return "mock:" + to_string(cfg.llm.mock_kind);
  return cfg.llm.endpoint.model_name.empty() ? "endpoint" : cfg.llm.endpoint.model_name;
}

void write_assess_artifacts(const Context& ctx, std::ostream* log) {
  const fs::path out_dir = ctx.cfg.output_dir;
  write_text(out_dir / "ingest_summary.json", ingest_summary_json(ctx.ingest).dump(2) + "\n");
  write_text(out_dir / "assessment.csv", assessment_csv(ctx.assessments));

  std::ostringstream weak_txt;
  for (const int u : ctx.cls.weak) {
    weak_txt << ctx.full.vocab().user_ids[static_cast<std::size_t>(u)] << '\n';
  }
  write_text(out_dir / "weak_users.txt", weak_txt.str());

  nlohmann::ordered_json meta;
  meta["config_hash"] = hex16(ctx.cfg.config_hash());
  meta["t_s"] = ctx.thr.t_s;
  meta["t_p"] = ctx.thr.t_p;
  meta["relevance_cutoff"] = ctx.thr.relevance_cutoff;
  meta["weak_users"] = ctx.cls.weak;
  write_text(out_dir / "assess_meta.json", meta.dump(2) + "\n");
  logln(log, "[assess] wrote assessment artifacts to " + out_dir.string());
}

std::vector<int> candidate_items_for(const Context& ctx, int user) {
  std::vector<int> candidates;
  if (ctx.cfg.llm.candidates == CandidateSource::test_items) {
    for (const auto& r : ctx.split.test.user_interactions(user)) candidates.push_back(r.item);
    return candidates;
  }
  // rs_top_n: the model's best unseen items, mirroring a deployed retriever.
  std::vector<int> pool;
  for (int i = 0; i < ctx.full.item_count(); ++i) {
    if (!ctx.split.train.contains(user, i) && !ctx.split.validation.contains(user, i)) {
      pool.push_back(i);
    }
  }
  auto ranked = rank_candidates(*ctx.model, user, pool);
  if (ranked.size() > static_cast<std::size_t>(ctx.cfg.llm.rs_top_n)) {
    ranked.resize(static_cast<std::size_t>(ctx.cfg.llm.rs_top_n));
  }
  return ranked;
}

// AUC of an explicit ranking: position is the score, every listed item is
// labeled by membership in relevant.
std::optional<double> position_auc(const std::vector<int>& ordered,
                                   const std::unordered_set<int>& relevant) {
  std::vector<double> rel, irr;
  for (std::size_t pos = 0; pos < ordered.size(); ++pos) {
    const double score = -static_cast<double>(pos);
    (relevant.count(ordered[pos]) ? rel : irr).push_back(score);
  }
  if (rel.empty() || irr.empty()) return std::nullopt;
  return user_auc(rel, irr);
}

struct WeakUserWork {
  int user = -1;
  bool promptable = false;
  Instruction instruction;
  std::string response;
  int attempts = 0;
  double latency_seconds = 0.0;
  bool backend_failed = false;
  std::string failure;
};

}  // namespace

RankedList merge_rankings(const RankedList& rs, const RankedList& llm,
                          std::optional<double> auc_rs, std::optional<double> auc_llm,
                          MergeMode mode) {
  if (mode == MergeMode::deployment) {
    RankedList out = llm;
    out.source = ListSource::llm;
    return out;
  }
  if (auc_rs && auc_llm && *auc_llm > *auc_rs) {
    RankedList out = llm;
    out.source = ListSource::llm;
    return out;
  }
  RankedList out = rs;
  out.source = ListSource::rs;
  return out;
}

CostBlock cost_report(int n_weak, int n_users, double per_query_seconds) {
  if (n_weak < 0 || n_users < 0 || n_weak > n_users) {
    throw std::invalid_argument("cost_report: need 0 <= n_weak <= n_users");
  }
  if (per_query_seconds <= 0.0) {
    throw std::invalid_argument("cost_report: per_query_seconds must be positive");
  }
  CostBlock cost;
  cost.n_queries = n_weak;
  cost.per_query_seconds = per_query_seconds;
  cost.hybrid_seconds = static_cast<double>(n_weak) * per_query_seconds;
  cost.all_users_seconds = static_cast<double>(n_users) * per_query_seconds;
  cost.savings_pct =
      n_users > 0 ? 100.0 * (1.0 - cost.hybrid_seconds / cost.all_users_seconds) : 0.0;
  return cost;
}

int weak_count_after(const std::vector<UserAssessment>& weak_users,
                     const std::unordered_map<int, double>& auc_llm, double t_p) {
  int count = 0;
  for (const auto& a : weak_users) {
    const auto it = auc_llm.find(a.user);
    if (it == auc_llm.end()) {
      throw std::invalid_argument("weak_count_after: missing auc for user " + a.user_id);
    }
    if (it->second <= t_p) ++count;
  }
  return count;
}

std::vector<UserAssessment> run_assess(const RunConfig& cfg, std::ostream* log) {
  Context ctx = prepare(cfg, log);
  stage("report", [&] { write_assess_artifacts(ctx, log); });
  return std::move(ctx.assessments);
}

void run_prompts(const RunConfig& cfg, std::ostream* log) {
  const fs::path meta_path = fs::path(cfg.output_dir) / "assess_meta.json";
  if (!fs::exists(meta_path)) {
    throw StageError("prompt", "prompt: no assessment artifacts in " + cfg.output_dir +
                                   "; run the assess command first");
  }
  nlohmann::json meta;
  {
    std::ifstream in(meta_path, std::ios::binary);
    in >> meta;
  }
  if (meta.value("config_hash", "") != hex16(cfg.config_hash())) {
    throw StageError("prompt", "prompt: assessment artifacts in " + cfg.output_dir +
                                   " were produced by a different config; rerun assess");
  }

  Context ctx = prepare(cfg, log);
  const auto weak = meta.at("weak_users").get<std::vector<int>>();
  std::size_t written = 0;
  stage("prompt", [&] {
    for (const int u : weak) {
      auto candidates = candidate_items_for(ctx, u);
      if (candidates.empty()) continue;
      const Instruction ins = build_instruction(ctx.split, u, std::move(candidates),
                                                cfg.llm.history_cap, cfg.seeds.shuffle);
      write_text(fs::path(cfg.output_dir) / "prompts" / ("user_" + ins.user_id + ".txt"),
                 ins.rendered_text);
      ++written;
    }
  });
  logln(log, "[prompt] wrote " + std::to_string(written) + " prompts to " + cfg.output_dir +
                 "/prompts");
}

HybridReport run_hybrid(const RunConfig& cfg, std::ostream* log) {
  Context ctx = prepare(cfg, log);
  stage("report", [&] { write_assess_artifacts(ctx, log); });

  HybridReport report;
  report.config = cfg;
  report.ingest = ctx.ingest;
  report.filtered_users = static_cast<std::size_t>(ctx.full.user_count());
  report.filtered_items = static_cast<std::size_t>(ctx.full.item_count());
  report.filtered_interactions = ctx.full.size();
  report.t_s = ctx.thr.t_s;
  report.relevance_cutoff = ctx.thr.relevance_cutoff;
  report.llm_kind = llm_kind_name(cfg);
  report.template_version = kPromptTemplateVersion;
  report.model_cache_hit = ctx.cache_hit;
  report.grid_configs_tried = ctx.grid_tried;
  report.weak_before = static_cast<int>(ctx.cls.weak.size());

  const std::unordered_set<int> weak_set(ctx.cls.weak.begin(), ctx.cls.weak.end());

  // Phase 2: build instructions for every promptable weak user, get
  // completions (mock inline; endpoint over a bounded worker pool), then fold
  // the results back in ascending user order so artifacts never depend on
  // scheduling.
  std::vector<WeakUserWork> work(ctx.cls.weak.size());
  stage("prompt", [&] {
    for (std::size_t k = 0; k < ctx.cls.weak.size(); ++k) {
      const int u = ctx.cls.weak[k];
      work[k].user = u;
      auto candidates = candidate_items_for(ctx, u);
      if (candidates.empty()) continue;
      work[k].instruction = build_instruction(ctx.split, u, std::move(candidates),
                                              cfg.llm.history_cap, cfg.seeds.shuffle);
      work[k].promptable = true;
    }
  });

  stage("complete", [&] {
    if (cfg.llm.use_mock) {
      MockLlm mock;
      mock.kind = cfg.llm.mock_kind;
      mock.noise_p = cfg.llm.noise_p;
      mock.hallucination_count = cfg.llm.hallucination_count;
      mock.seed = cfg.seeds.shuffle;
      for (auto& w : work) {
        if (!w.promptable) continue;
        std::unordered_map<int, double> truth;
        for (const auto& r : ctx.split.test.user_interactions(w.user)) {
          truth.emplace(r.item, r.rating);
        }
        w.response = mock_complete(mock, w.instruction, truth);
        w.attempts = 1;
      }
      return;
    }

    std::vector<std::size_t> queue;
    for (std::size_t k = 0; k < work.size(); ++k) {
      if (work[k].promptable) queue.push_back(k);
    }
    std::mutex mu;
    std::size_t next = 0;
    const auto worker = [&] {
      while (true) {
        std::size_t k;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= queue.size()) return;
          k = queue[next++];
        }
        WeakUserWork& w = work[k];
        try {
          const Completion c = complete(cfg.llm.endpoint, w.instruction.rendered_text);
          w.response = c.text;
          w.attempts = c.attempts;
          w.latency_seconds = c.latency_seconds;
        } catch (const std::exception& e) {
          w.backend_failed = true;
          w.failure = e.what();
        }
      }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.llm.endpoint.max_concurrency),
                              std::max<std::size_t>(queue.size(), 1));
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    for (const auto& w : work) {
      if (w.backend_failed) {
        logln(log, "[complete] user " + std::to_string(w.user) + " failed: " + w.failure);
      }
    }
  });

  std::unordered_map<int, const WeakUserWork*> work_by_user;
  for (const auto& w : work) work_by_user.emplace(w.user, &w);

  std::unordered_map<int, double> auc_llm_map;

  stage("merge", [&] {
    const fs::path out_dir = cfg.output_dir;
    for (const auto& a : ctx.assessments) {
      UserReportRow row;
      row.user = a.user;
      row.user_id = a.user_id;
      row.n_train = a.n_train;
      row.n_test = a.n_test;
      row.sparsity = a.sparsity;
      row.auc_rs = a.auc;
      row.auc_rs_defined = a.auc_defined;
      row.inactive = a.inactive;
      row.weak = a.weak;
      if (!a.auc_defined) ++report.undefined_auc_users;

      const UserPools pools = build_user_pools(ctx.split, a.user, ctx.thr, cfg.seeds.negatives);
      const std::unordered_set<int> relevant(pools.relevant.begin(), pools.relevant.end());

      std::vector<int> test_candidates;
      for (const auto& r : ctx.split.test.user_interactions(a.user)) {
        test_candidates.push_back(r.item);
      }
      RankedList rs_list{a.user, rank_candidates(*ctx.model, a.user, test_candidates),
                         ListSource::rs};
      if (!rs_list.items.empty()) {
        row.ndcg10_rs = ndcg_at_k(rs_list.items, relevant, 10);
      }
      if (a.auc_defined) row.auc_final = a.auc;
      row.ndcg10_final = row.ndcg10_rs;

      if (a.weak) {
        const WeakUserWork& w = *work_by_user.at(a.user);
        double inherited = a.auc;  // 0 when undefined; the user stays weak
        if (!w.promptable) {
          ++report.unpromptable;
          row.source = ListSource::rs_fallback;
          auc_llm_map.emplace(a.user, inherited);
        } else if (w.backend_failed) {
          ++report.parse_failures;
          row.parse_failed = true;
          row.source = ListSource::rs_fallback;
          row.llm_attempts = cfg.llm.endpoint.retry.max_attempts;
          auc_llm_map.emplace(a.user, inherited);
        } else {
          row.llm_attempts = w.attempts;
          row.llm_latency_seconds = w.latency_seconds;
          write_text(out_dir / "prompts" / ("user_" + a.user_id + ".txt"),
                     w.instruction.rendered_text);
          write_text(out_dir / "responses" / ("user_" + a.user_id + ".txt"), w.response);

          std::vector<std::size_t> fallback(w.instruction.candidates.size());
          {
            // Fallback order: the base ranker's view of the candidates.
            const auto rs_order =
                rank_candidates(*ctx.model, a.user, w.instruction.candidates);
            std::unordered_map<int, std::size_t> pos_of;
            for (std::size_t p = 0; p < w.instruction.candidates.size(); ++p) {
              pos_of.emplace(w.instruction.candidates[p], p);
            }
            for (std::size_t p = 0; p < rs_order.size(); ++p) {
              fallback[p] = pos_of.at(rs_order[p]);
            }
          }
          const auto parsed = parse_ranked_response(
              w.response, w.instruction.candidate_titles, fallback);
          if (!parsed) {
            ++report.parse_failures;
            row.parse_failed = true;
            row.source = ListSource::rs_fallback;
            auc_llm_map.emplace(a.user, inherited);
          } else {
            RankedList llm_list{a.user, {}, ListSource::llm};
            for (const std::size_t c : *parsed) {
              llm_list.items.push_back(w.instruction.candidates[c]);
            }
            // The reranked slate implicitly puts the rest of the pool below
            // everything it ranked.
            std::vector<int> extended = llm_list.items;
            const std::unordered_set<int> in_list(llm_list.items.begin(), llm_list.items.end());
            for (const int i : pools.irrelevant) {
              if (!in_list.count(i)) extended.push_back(i);
            }
            row.auc_llm = position_auc(extended, relevant);
            auc_llm_map.emplace(a.user, row.auc_llm ? *row.auc_llm : inherited);

            const std::optional<double> rs_auc =
                a.auc_defined ? std::optional<double>(a.auc) : std::nullopt;
            const RankedList final_list =
                merge_rankings(rs_list, llm_list, rs_auc, row.auc_llm, cfg.merge_mode);
            row.source = final_list.source;
            if (final_list.source == ListSource::llm) {
              row.auc_final = row.auc_llm;
              if (!final_list.items.empty()) {
                row.ndcg10_final = ndcg_at_k(final_list.items, relevant, 10);
              }
            }
          }
        }
      }
      report.rows.push_back(std::move(row));
    }
  });

  stage("report", [&] {
    std::vector<UserAssessment> weak_assessments;
    for (const auto& a : ctx.assessments) {
      if (a.weak) weak_assessments.push_back(a);
    }
    report.weak_after = weak_count_after(weak_assessments, auc_llm_map, ctx.thr.t_p);
    report.cost = cost_report(report.weak_before, ctx.full.user_count(),
                              cfg.llm.per_query_seconds);

    const auto mean_over = [](const std::vector<double>& v) -> std::optional<double> {
      if (v.empty()) return std::nullopt;
      double acc = 0.0;
      for (const double x : v) acc += x;
      return acc / static_cast<double>(v.size());
    };
    std::vector<double> base_auc, base_auc_weak, base_ndcg, base_ndcg_weak;
    std::vector<double> hyb_auc, hyb_auc_weak, hyb_ndcg, hyb_ndcg_weak;
    for (const auto& row : report.rows) {
      if (row.auc_rs_defined) {
        base_auc.push_back(row.auc_rs);
        if (row.weak) base_auc_weak.push_back(row.auc_rs);
      }
      if (row.auc_final) {
        hyb_auc.push_back(*row.auc_final);
        if (row.weak) hyb_auc_weak.push_back(*row.auc_final);
      }
      if (row.ndcg10_rs) {
        base_ndcg.push_back(*row.ndcg10_rs);
        if (row.weak) base_ndcg_weak.push_back(*row.ndcg10_rs);
      }
      if (row.ndcg10_final) {
        hyb_ndcg.push_back(*row.ndcg10_final);
        if (row.weak) hyb_ndcg_weak.push_back(*row.ndcg10_final);
      }
    }
    report.base.auc = mean_over(base_auc);
    report.base.auc_weak = mean_over(base_auc_weak);
    report.base.ndcg10 = mean_over(base_ndcg);
    report.base.ndcg10_weak = mean_over(base_ndcg_weak);
    report.base.n_auc = static_cast<int>(base_auc.size());
    report.base.n_auc_weak = static_cast<int>(base_auc_weak.size());
    report.base.n_ndcg = static_cast<int>(base_ndcg.size());
    report.base.n_ndcg_weak = static_cast<int>(base_ndcg_weak.size());
    report.hybrid.auc = mean_over(hyb_auc);
    report.hybrid.auc_weak = mean_over(hyb_auc_weak);
    report.hybrid.ndcg10 = mean_over(hyb_ndcg);
    report.hybrid.ndcg10_weak = mean_over(hyb_ndcg_weak);
    report.hybrid.n_auc = static_cast<int>(hyb_auc.size());
    report.hybrid.n_auc_weak = static_cast<int>(hyb_auc_weak.size());
    report.hybrid.n_ndcg = static_cast<int>(hyb_ndcg.size());
    report.hybrid.n_ndcg_weak = static_cast<int>(hyb_ndcg_weak.size());

    const fs::path out_dir = cfg.output_dir;
    write_text(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
    write_text(out_dir / "weak_counts.csv", weak_counts_csv(report));
    logln(log, "[report] wrote report.json and weak_counts.csv to " + out_dir.string());
  });

  return report;
}

}  // namespace hybridrank
