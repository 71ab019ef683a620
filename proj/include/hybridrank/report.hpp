#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hybridrank/assess.hpp"
#include "hybridrank/config.hpp"

namespace hybridrank {

enum class ListSource { rs, llm, rs_fallback };

std::string to_string(ListSource source);

struct CostBlock {
  int n_queries = 0;
  double per_query_seconds = 0.0;
  double hybrid_seconds = 0.0;
  double all_users_seconds = 0.0;
  double savings_pct = 0.0;
};

struct UserReportRow {
  int user = -1;
  std::string user_id;
  int n_train = 0;
  int n_test = 0;
  double sparsity = 0.0;
  double auc_rs = 0.0;
  bool auc_rs_defined = false;
  bool inactive = false;
  bool weak = false;
  std::optional<double> auc_llm;    // weak users only
  std::optional<double> auc_final;  // list actually served
  std::optional<double> ndcg10_rs;
  std::optional<double> ndcg10_final;
  ListSource source = ListSource::rs;
  bool parse_failed = false;
  int llm_attempts = 0;
  double llm_latency_seconds = 0.0;
};

// One Table-style row: means over the users where the metric is defined.
struct AggregateBlock {
  std::optional<double> auc;
  std::optional<double> auc_weak;
  std::optional<double> ndcg10;
  std::optional<double> ndcg10_weak;
  int n_auc = 0;
  int n_auc_weak = 0;
  int n_ndcg = 0;
  int n_ndcg_weak = 0;
};

struct HybridReport {
  RunConfig config;
  IngestSummary ingest;
  std::size_t filtered_users = 0;
  std::size_t filtered_items = 0;
  std::size_t filtered_interactions = 0;
  double t_s = 0.0;
  double relevance_cutoff = 0.0;
  std::string llm_kind;  // "mock:oracle" or the endpoint model name
  std::string template_version;
  bool model_cache_hit = false;
  int grid_configs_tried = 1;
  int weak_before = 0;
  int weak_after = 0;
  int parse_failures = 0;
  int unpromptable = 0;
  int undefined_auc_users = 0;
  AggregateBlock base, hybrid;
  CostBlock cost;
  std::vector<UserReportRow> rows;
};

nlohmann::ordered_json report_to_json(const HybridReport& report);

// Human-readable closing block. Every number is serialized exactly as in
// report_to_json, so the two never disagree.
std::string render_summary(const HybridReport& report);

std::string weak_counts_csv(const HybridReport& report);

nlohmann::ordered_json ingest_summary_json(const IngestSummary& summary);

}  // namespace hybridrank
