#include "hybridrank/instruction.hpp"

#include <algorithm>
#include <sstream>

#include "hybridrank/rng.hpp"

namespace hybridrank {

const char* const kPromptTemplateVersion = "1";

namespace {

// Titles go into numbered lists; embedded newlines or tabs would break the
// line-oriented format.
std::string sanitize_title(const std::string& title) {
  std::string out;
  out.reserve(title.size());
  bool pending_space = false;
  for (const char c : title) {
    if (c == '\r' || c == '\n' || c == '\t' || c == ' ') {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::string format_rating(double rating) {
  std::ostringstream s;
  s << rating;
  return s.str();
}

}  // namespace

double liked_floor(const RatingScale& scale) { return scale.max <= 5.0 ? 3.0 : 6.0; }

Instruction build_instruction(const SplitDataset& split, int user,
                              std::vector<int> candidate_items, int history_cap,
                              std::uint64_t seed) {
  if (candidate_items.empty()) {
    throw std::invalid_argument("nothing to rank: user has no candidate items");
  }
  if (history_cap <= 0) throw std::invalid_argument("history_cap must be positive");

  const Vocab& vocab = split.train.vocab();
  Instruction ins;
  ins.user = user;
  ins.user_id = vocab.user_ids[static_cast<std::size_t>(user)];

  const double floor = liked_floor(vocab.scale);
  const auto train_rows = split.train.user_interactions(user);
  std::vector<const Interaction*> liked;
  for (const auto& r : train_rows) {
    if (r.rating >= floor) liked.push_back(&r);
  }
  if (liked.empty()) {
    // Nothing the user liked; fall back to whatever they rated and make the
    // ratings explicit so the backend sees the (possibly negative) context.
    for (const auto& r : train_rows) liked.push_back(&r);
    ins.ratings_shown = true;
  }

  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(user)));
  if (liked.size() > static_cast<std::size_t>(history_cap)) {
    liked = rng.sample(std::move(liked), static_cast<std::size_t>(history_cap));
  }
  std::sort(liked.begin(), liked.end(), [](const Interaction* a, const Interaction* b) {
    if (a->rating != b->rating) return a->rating > b->rating;
    if (a->timestamp != b->timestamp) return a->timestamp > b->timestamp;
    return a->item < b->item;
  });
  for (const Interaction* r : liked) {
    ins.history.push_back({r->item, sanitize_title(vocab.item_titles[static_cast<std::size_t>(r->item)]),
                           r->rating, r->timestamp});
  }

  rng.shuffle(candidate_items);
  ins.candidates = std::move(candidate_items);
  for (const int item : ins.candidates) {
    ins.candidate_titles.push_back(sanitize_title(vocab.item_titles[static_cast<std::size_t>(item)]));
  }

  ins.rendered_text = render_prompt(ins);
  return ins;
}

Instruction build_instruction(const SplitDataset& split, int user, int history_cap,
                              std::uint64_t seed) {
  std::vector<int> candidates;
  for (const auto& r : split.test.user_interactions(user)) candidates.push_back(r.item);
  return build_instruction(split, user, std::move(candidates), history_cap, seed);
}

std::string render_prompt(const Instruction& ins) {
  std::ostringstream out;
  out << "User " << ins.user_id
      << " liked the following movies in decreasing order of preference where the topmost item"
         " is the most preferred one:\n";
  std::size_t n = 0;
  for (const auto& h : ins.history) {
    out << ++n << ". " << h.title;
    if (ins.ratings_shown) out << " (rated " << format_rating(h.rating) << ")";
    out << '\n';
  }
  out << "Now, rank the following items in decreasing order of preference such that the top most"
         " movie should be the most preferred one:\n";
  n = 0;
  for (const auto& title : ins.candidate_titles) {
    out << ++n << ". " << title << '\n';
  }
  out << "Only include items from the candidate list above. Output a numbered list of the"
         " candidate titles and nothing else.\n";
  return out.str();
}

}  // namespace hybridrank
