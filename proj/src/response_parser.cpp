#include "hybridrank/response_parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace hybridrank {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Bytes >= 0x80 count as word characters so multi-byte sequences never split.
bool is_word(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (const char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

void strip_trailing_year(std::string& s) {
  if (s.size() < 6 || s.back() != ')') return;
  const std::size_t open = s.rfind('(');
  if (open == std::string::npos || s.size() - open != 6) return;
  for (std::size_t k = open + 1; k + 1 < s.size(); ++k) {
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) return;
  }
  s.resize(open);
  while (!s.empty() && s.back() == ' ') s.pop_back();
}

std::vector<std::size_t> occurrences(const std::string& text, const std::string& pattern) {
  std::vector<std::size_t> out;
  if (pattern.empty()) return out;
  std::size_t pos = 0;
  while ((pos = text.find(pattern, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word(text[pos - 1]);
    const std::size_t end = pos + pattern.size();
    const bool right_ok = end == text.size() || !is_word(text[end]);
    if (left_ok && right_ok) out.push_back(pos);
    ++pos;
  }
  return out;
}

}  // namespace

std::string normalize_title(std::string_view title) {
  std::string s = fold(title);
  strip_trailing_year(s);
  return s;
}

std::optional<std::vector<std::size_t>> parse_ranked_response(
    std::string_view text, std::span<const std::string> candidate_titles,
    std::span<const std::size_t> fallback_order) {
  const std::size_t n = candidate_titles.size();
  if (fallback_order.size() != n) {
    throw std::invalid_argument("fallback_order must cover every candidate");
  }

  const std::string folded = fold(text);

  // Candidates sharing a normalized form, in fallback order: the k-th one
  // claims the k-th occurrence, so duplicates still yield a permutation.
  std::map<std::string, std::vector<std::size_t>> by_form;
  for (const std::size_t c : fallback_order) {
    if (c >= n) throw std::invalid_argument("fallback_order index out of range");
    by_form[normalize_title(candidate_titles[c])].push_back(c);
  }

  struct Mention {
    std::size_t pos;
    std::size_t form_len;
    std::size_t fallback_rank;
    std::size_t candidate;
  };
  std::vector<Mention> mentions;
  std::vector<std::size_t> fallback_rank(n, 0);
  for (std::size_t r = 0; r < n; ++r) fallback_rank[fallback_order[r]] = r;

  for (const auto& [form, members] : by_form) {
    if (form.empty()) continue;
    const auto occ = occurrences(folded, form);
    const std::size_t take = std::min(occ.size(), members.size());
    for (std::size_t k = 0; k < take; ++k) {
      mentions.push_back({occ[k], form.size(), fallback_rank[members[k]], members[k]});
    }
  }
  if (mentions.empty()) return std::nullopt;

  // Reading order; a longer form wins a shared start position ("alien vs ripley"
  // also contains "alien").
  std::sort(mentions.begin(), mentions.end(), [](const Mention& a, const Mention& b) {
    if (a.pos != b.pos) return a.pos < b.pos;
    if (a.form_len != b.form_len) return a.form_len > b.form_len;
    return a.fallback_rank < b.fallback_rank;
  });

  std::vector<bool> placed(n, false);
  std::vector<std::size_t> out;
  out.reserve(n);
  for (const auto& m : mentions) {
    out.push_back(m.candidate);
    placed[m.candidate] = true;
  }
  for (const std::size_t c : fallback_order) {
    if (!placed[c]) out.push_back(c);
  }
  return out;
}

}  // namespace hybridrank
