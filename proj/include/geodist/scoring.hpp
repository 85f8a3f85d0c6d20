#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "geodist/embed.hpp"

namespace geodist {

/// 1 - cos(u, v), in [0, 2]. Throws ZeroVectorError for a zero input.
/// Bitwise-identical vectors score exactly 0.
double cosine_distance(std::span<const double> u, std::span<const double> v);
double cosine_distance(std::span<const float> u, std::span<const float> v);

/// Raw regional divergence of one word: cosine distance between its two
/// region embeddings. Symmetric in the pair; exactly 0 while the deltas
/// are still zero.
double distance_score(const EmbeddingModel& model, std::string_view word,
                      std::string_view region_i, std::string_view region_j);
double distance_score(const EmbeddingModel& model, WordId word,
                      std::size_t region_i, std::size_t region_j);

/// Z-scores with the population (n) divisor. Input must have >= 2 values
/// with nonzero spread, else DegeneratePopulationError.
std::vector<double> standardize(std::span<const double> raw);

/// A word qualifies for the Z population of a pair when it meets the
/// vocabulary min_count in both regions (region-exclusive words never do).
bool scorable(const Vocabulary& vocab, WordId word, std::size_t region_i,
              std::size_t region_j);

struct WordScore {
  std::string word;
  double raw = 0.0;
  double z = 0.0;  // NaN when not scorable
  bool scorable = false;
};

struct ScoreTable {
  std::string region_i;
  std::string region_j;
  std::vector<WordScore> rows;  // vocabulary index order
  double mean = 0.0;            // over scorable raw scores
  double stddev = 0.0;

  const WordScore* find(std::string_view word) const;
  std::vector<std::string> scorable_words() const;
};

/// Raw score for every vocabulary word plus Z over the scorable
/// population.
ScoreTable build_score_table(const EmbeddingModel& model,
                             std::string_view region_i,
                             std::string_view region_j);

void write_score_tsv(std::ostream& out, const ScoreTable& table);

}  // namespace geodist
