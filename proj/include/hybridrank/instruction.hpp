#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hybridrank/split.hpp"

namespace hybridrank {

// Bump when the rendered wording changes; recorded in every report so runs
// remain comparable.
extern const char* const kPromptTemplateVersion;

struct HistoryEntry {
  int item = -1;
  std::string title;
  double rating = 0.0;
  long long timestamp = -1;
};

// Everything needed to query a ranking backend for one user: the preference
// history block, the shuffled candidate list, and the rendered prompt text.
struct Instruction {
  int user = -1;
  std::string user_id;
  std::vector<HistoryEntry> history;
  std::vector<int> candidates;
  std::vector<std::string> candidate_titles;
  // true when the user had no liked train items and the history instead shows
  // a sample of everything they rated, with the ratings spelled out.
  bool ratings_shown = false;
  std::string rendered_text;
};

// The rating floor above which a train item counts as liked: 3 on narrow
// scales, 6 on wide ones (one notch under the relevance cutoff, so lukewarm
// context stays out of the prompt).
double liked_floor(const RatingScale& scale);

// Builds the prompt for one user. History: up to history_cap liked train
// items, sampled by a per-user substream of seed when over the cap, shown
// best-first (rating desc, then recency, then item index). Candidates are
// shuffled by the same substream so their order leaks nothing. Throws
// std::invalid_argument when candidate_items is empty.
Instruction build_instruction(const SplitDataset& split, int user,
                              std::vector<int> candidate_items, int history_cap,
                              std::uint64_t seed);

// Convenience overload: candidates are the user's test items.
Instruction build_instruction(const SplitDataset& split, int user, int history_cap,
                              std::uint64_t seed);

std::string render_prompt(const Instruction& instruction);

}  // namespace hybridrank
