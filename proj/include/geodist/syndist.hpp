#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "geodist/corpus.hpp"

namespace geodist {

/// Empirical POS-tag distribution of one word in one region. probs is laid
/// out in tagset order and sums to 1 when support > 0; a support of 0
/// means the word was never observed tagged in that region.
struct PosDistribution {
  std::string word;
  std::string region;
  std::vector<double> probs;
  std::uint64_t support = 0;
};

/// Jensen-Shannon divergence, log base 2, so the score lives in [0, 1].
/// Inputs must be equal-length probability vectors (entries >= 0, each
/// summing to 1 within 1e-6). 0 log 0 terms contribute nothing.
double js_divergence(std::span<const double> p, std::span<const double> q);

struct SyntacticScore {
  std::string word;
  std::string region_i;
  std::string region_j;
  double jsd = 0.0;
  std::uint64_t support_i = 0;
  std::uint64_t support_j = 0;
};

/// Tag-count accumulator over a tagged document stream. Counting shards
/// merge by addition; scoring is pure once counts are in.
class PosTable {
 public:
  explicit PosTable(TagSet tagset);

  const TagSet& tagset() const { return tagset_; }

  /// Tagged documents only; weight multiplies each occurrence.
  void add(const Document& doc);
  void add_all(std::span<const Document> docs);

  PosDistribution distribution(std::string_view word,
                               std::string_view region) const;

  /// JSD between the word's two regional tag distributions. Throws
  /// InsufficientSupportError when either side has support < min_support.
  SyntacticScore score(std::string_view word, std::string_view region_i,
                       std::string_view region_j,
                       std::uint64_t min_support) const;

  /// All words with enough support in both regions, sorted by descending
  /// JSD (ties lexicographic).
  std::vector<SyntacticScore> ranking(std::string_view region_i,
                                      std::string_view region_j,
                                      std::uint64_t min_support) const;

  std::vector<std::string> words() const;

 private:
  const std::vector<std::uint64_t>* find_counts(std::string_view word,
                                                std::string_view region) const;

  TagSet tagset_;
  // word -> region -> counts per tag (tagset order)
  std::unordered_map<std::string,
                     std::unordered_map<std::string, std::vector<std::uint64_t>>>
      counts_;
};

void write_syntactic_tsv(std::ostream& out,
                         std::span<const SyntacticScore> scores);

/// Fig.-style bar-chart export: one row per (word, region, tag).
void write_pos_bars_csv(std::ostream& out,
                        std::span<const PosDistribution> dists,
                        const TagSet& tagset);

}  // namespace geodist
