#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geodist/corpus.hpp"

namespace geodist {

/// Frequency-baseline score: difference of natural-log word probabilities
/// between a region pair. Positive delta means the word is more probable
/// in region_i.
struct FrequencyScore {
  std::string word;
  std::string region_i;
  std::string region_j;
  double delta = 0.0;
  // Present in exactly one of the two regions; a trivial case downstream
  // reports may filter.
  bool exclusive = false;
};

/// Smoothing floor used when no explicit epsilon is given:
/// 1 / (total_tokens(r) + |V|), an add-one-style per-region floor that
/// keeps region-exclusive words finite.
double default_epsilon(const Vocabulary& vocab, std::string_view region);

FrequencyScore frequency_score(const Vocabulary& vocab, std::string_view word,
                               std::string_view region_i,
                               std::string_view region_j,
                               std::optional<double> epsilon = std::nullopt);

/// Every vocabulary word scored and sorted by |delta| descending, ties
/// broken lexicographically. top_k == 0 yields an empty list; top_k >=
/// |V| yields all words.
std::vector<FrequencyScore> frequency_ranking(
    const Vocabulary& vocab, std::string_view region_i,
    std::string_view region_j, std::optional<double> epsilon = std::nullopt,
    std::size_t top_k = SIZE_MAX);

void write_frequency_tsv(std::ostream& out,
                         std::span<const FrequencyScore> scores);

}  // namespace geodist
