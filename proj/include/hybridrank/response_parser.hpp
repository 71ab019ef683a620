#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hybridrank {

// Canonical form used for matching: ASCII lowercase, whitespace runs
// collapsed to single spaces, trimmed, one trailing parenthesized year
// removed ("Alien (1979)" -> "alien").
std::string normalize_title(std::string_view title);

// Recovers a ranking from free-form backend text. Titles are matched against
// the normalized text at word boundaries; the mention order (first occurrence
// wins) gives the head of the ranking and unmentioned candidates follow in
// fallback_order. Candidates sharing a normalized form are assigned to
// successive occurrences in fallback order. Returns indices into
// candidate_titles, always a full permutation, or nullopt when nothing
// matched at all (a parse failure). fallback_order must be a permutation of
// the candidate indices.
std::optional<std::vector<std::size_t>> parse_ranked_response(
    std::string_view text, std::span<const std::string> candidate_titles,
    std::span<const std::size_t> fallback_order);

}  // namespace hybridrank
