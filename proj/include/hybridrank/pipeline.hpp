#pragma once

#include <iosfwd>
#include <unordered_map>

#include "hybridrank/report.hpp"

namespace hybridrank {

struct RankedList {
  int user = -1;
  std::vector<int> items;
  ListSource source = ListSource::rs;
};

// Picks the list to serve. Evaluation mode keeps the reranked list only when
// its measured AUC strictly beats the base ranker's (ties and undefined
// scores keep the base list); deployment mode always trusts the reranker.
RankedList merge_rankings(const RankedList& rs, const RankedList& llm,
                          std::optional<double> auc_rs, std::optional<double> auc_llm,
                          MergeMode mode);

// Query-budget arithmetic: one query per weak user versus one per user.
CostBlock cost_report(int n_weak, int n_users, double per_query_seconds);

// Weak users whose reranked lists still score at or below t_p. auc_llm must
// hold an entry for every weak user (callers substitute the user's base AUC
// when the reranked one is unavailable).
int weak_count_after(const std::vector<UserAssessment>& weak_users,
                     const std::unordered_map<int, double>& auc_llm, double t_p);

// The three commands. Artifacts land under cfg.output_dir; log, when given,
// receives progress lines. All three are deterministic for mock backends.
HybridReport run_hybrid(const RunConfig& cfg, std::ostream* log = nullptr);
std::vector<UserAssessment> run_assess(const RunConfig& cfg, std::ostream* log = nullptr);
void run_prompts(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace hybridrank
