#include "hybridrank/report.hpp"

#include <iomanip>
#include <sstream>

namespace hybridrank {

namespace {

std::string hex16(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setfill('0') << std::setw(16) << v;
  return s.str();
}

// Single serialization authority for numbers: the JSON dump. The summary text
// reuses it so stdout and report.json always carry identical digits.
std::string num(double v) { return nlohmann::json(v).dump(); }

nlohmann::ordered_json opt(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

std::string opt_str(const std::optional<double>& v) { return v ? num(*v) : "-"; }

nlohmann::ordered_json aggregate_json(const AggregateBlock& a) {
  nlohmann::ordered_json j;
  j["auc"] = opt(a.auc);
  j["n_auc"] = a.n_auc;
  j["auc_weak"] = opt(a.auc_weak);
  j["n_auc_weak"] = a.n_auc_weak;
  j["ndcg10"] = opt(a.ndcg10);
  j["n_ndcg10"] = a.n_ndcg;
  j["ndcg10_weak"] = opt(a.ndcg10_weak);
  j["n_ndcg10_weak"] = a.n_ndcg_weak;
  return j;
}

double reduction_pct(int before, int after) {
  if (before <= 0) return 0.0;
  return 100.0 * (1.0 - static_cast<double>(after) / static_cast<double>(before));
}

}  // namespace

std::string to_string(ListSource source) {
  switch (source) {
    case ListSource::rs: return "rs";
    case ListSource::llm: return "llm";
    case ListSource::rs_fallback: return "rs_fallback";
  }
  return "?";
}

nlohmann::ordered_json ingest_summary_json(const IngestSummary& s) {
  nlohmann::ordered_json j;
  j["users"] = s.users;
  j["items"] = s.items;
  j["interactions"] = s.interactions;
  j["duplicates_dropped"] = s.duplicates_dropped;
  j["fallback_titles"] = s.fallback_titles;
  j["replaced_encoding"] = s.replaced_encoding;
  return j;
}

nlohmann::ordered_json report_to_json(const HybridReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["config_hash"] = hex16(r.config.config_hash());
  j["template_version"] = r.template_version;
  j["config"] = r.config.to_json();
  j["ingest"] = ingest_summary_json(r.ingest);
  j["filtered"] = {{"users", r.filtered_users},
                   {"items", r.filtered_items},
                   {"interactions", r.filtered_interactions}};
  j["thresholds_resolved"] = {{"t_p", r.config.thresholds.t_p},
                              {"t_s", r.t_s},
                              {"relevance_cutoff", r.relevance_cutoff},
                              {"n_sampled_negatives", r.config.thresholds.n_sampled_negatives}};
  j["model"] = {{"kind", to_string(r.config.model.kind)},
                {"cache_hit", r.model_cache_hit},
                {"grid_configs_tried", r.grid_configs_tried}};
  j["llm"] = {{"kind", r.llm_kind}, {"per_query_seconds", r.config.llm.per_query_seconds}};
  j["weak"] = {{"before", r.weak_before},
               {"after", r.weak_after},
               {"reduction_pct", reduction_pct(r.weak_before, r.weak_after)},
               {"parse_failures", r.parse_failures},
               {"unpromptable", r.unpromptable},
               {"undefined_auc_users", r.undefined_auc_users}};
  j["aggregates"] = {{"rs", aggregate_json(r.base)}, {"hybrid", aggregate_json(r.hybrid)}};
  j["cost"] = {{"n_queries", r.cost.n_queries},
               {"per_query_seconds", r.cost.per_query_seconds},
               {"hybrid_seconds", r.cost.hybrid_seconds},
               {"all_users_seconds", r.cost.all_users_seconds},
               {"savings_pct", r.cost.savings_pct}};

  auto& users = j["users"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json u;
    u["user_id"] = row.user_id;
    u["n_train"] = row.n_train;
    u["n_test"] = row.n_test;
    u["sparsity_index"] = row.sparsity;
    u["auc_rs"] = row.auc_rs;
    u["auc_rs_defined"] = row.auc_rs_defined;
    u["inactive"] = row.inactive;
    u["weak"] = row.weak;
    u["auc_llm"] = opt(row.auc_llm);
    u["auc_final"] = opt(row.auc_final);
    u["ndcg10_rs"] = opt(row.ndcg10_rs);
    u["ndcg10_final"] = opt(row.ndcg10_final);
    u["source"] = to_string(row.source);
    u["parse_failed"] = row.parse_failed;
    u["llm_attempts"] = row.llm_attempts;
    u["llm_latency_seconds"] = row.llm_latency_seconds;
    users.push_back(std::move(u));
  }
  return j;
}

std::string render_summary(const HybridReport& r) {
  std::ostringstream out;
  out << to_string(r.config.model.kind) << " + " << r.llm_kind << " on "
      << to_string(r.config.dataset.format) << " (" << to_string(r.config.merge_mode)
      << " merge, template v" << r.template_version << ")\n";
  out << "ingest: users=" << r.ingest.users << " items=" << r.ingest.items
      << " interactions=" << r.ingest.interactions << "; filtered: users=" << r.filtered_users
      << " items=" << r.filtered_items << " interactions=" << r.filtered_interactions << "\n";
  out << "thresholds: t_p=" << num(r.config.thresholds.t_p) << " t_s=" << num(r.t_s)
      << " cutoff=" << num(r.relevance_cutoff) << "\n";
  out << "weak users: " << r.weak_before << " of " << r.rows.size() << " -> " << r.weak_after
      << " after reranking (reduction " << num(reduction_pct(r.weak_before, r.weak_after))
      << "%)\n";

  const auto line = [&](const char* name, const AggregateBlock& a) {
    out << std::left << std::setw(10) << name << " auc=" << opt_str(a.auc)
        << " auc_weak=" << opt_str(a.auc_weak) << " ndcg10=" << opt_str(a.ndcg10)
        << " ndcg10_weak=" << opt_str(a.ndcg10_weak) << "\n";
  };
  line("rs", r.base);
  line("hybrid", r.hybrid);

  out << "cost: " << r.cost.n_queries << " queries x " << num(r.cost.per_query_seconds)
      << "s = " << num(r.cost.hybrid_seconds) << "s vs " << num(r.cost.all_users_seconds)
      << "s for all users (savings " << num(r.cost.savings_pct) << "%)\n";
  out << "parse_failures=" << r.parse_failures << " unpromptable=" << r.unpromptable
      << " undefined_auc_users=" << r.undefined_auc_users << " model_cache_hit="
      << (r.model_cache_hit ? "yes" : "no") << "\n";
  return out.str();
}

std::string weak_counts_csv(const HybridReport& r) {
  std::ostringstream out;
  out << "model,llm_kind,weak_before,weak_after,reduction_pct\n";
  out << to_string(r.config.model.kind) << ',' << r.llm_kind << ',' << r.weak_before << ','
      << r.weak_after << ',' << num(reduction_pct(r.weak_before, r.weak_after)) << '\n';
  return out.str();
}

}  // namespace hybridrank
