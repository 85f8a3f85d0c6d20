#include "geodist/freqdist.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "geodist/tsv.hpp"

namespace geodist {

double default_epsilon(const Vocabulary& vocab, std::string_view region) {
  const double total = static_cast<double>(vocab.total_tokens(region));
  return 1.0 / (total + static_cast<double>(vocab.size()));
}

FrequencyScore frequency_score(const Vocabulary& vocab, std::string_view word,
                               std::string_view region_i,
                               std::string_view region_j,
                               std::optional<double> epsilon) {
  if (region_i == region_j)
    throw std::invalid_argument("region pair must be distinct");
  const WordId id = vocab.require(word);
  const std::size_t ri = vocab.require_region(region_i);
  const std::size_t rj = vocab.require_region(region_j);
  if (epsilon && *epsilon <= 0.0)
    throw std::invalid_argument("epsilon must be > 0");

  const double eps_i = epsilon ? *epsilon : default_epsilon(vocab, region_i);
  const double eps_j = epsilon ? *epsilon : default_epsilon(vocab, region_j);
  const double p_i = static_cast<double>(vocab.count(id, ri)) /
                     static_cast<double>(vocab.total_tokens(ri));
  const double p_j = static_cast<double>(vocab.count(id, rj)) /
                     static_cast<double>(vocab.total_tokens(rj));

  FrequencyScore score;
  score.word = std::string(word);
  score.region_i = std::string(region_i);
  score.region_j = std::string(region_j);
  score.delta = std::log(std::max(p_i, eps_i)) - std::log(std::max(p_j, eps_j));
  score.exclusive =
      (vocab.count(id, ri) == 0) != (vocab.count(id, rj) == 0);
  return score;
}

std::vector<FrequencyScore> frequency_ranking(const Vocabulary& vocab,
                                              std::string_view region_i,
                                              std::string_view region_j,
                                              std::optional<double> epsilon,
                                              std::size_t top_k) {
  std::vector<FrequencyScore> scores;
  if (top_k == 0) return scores;
  scores.reserve(vocab.size());
  for (const std::string& word : vocab.words())
    scores.push_back(frequency_score(vocab, word, region_i, region_j, epsilon));
  std::sort(scores.begin(), scores.end(),
            [](const FrequencyScore& a, const FrequencyScore& b) {
              const double ma = std::fabs(a.delta);
              const double mb = std::fabs(b.delta);
              if (ma != mb) return ma > mb;
              return a.word < b.word;
            });
  if (scores.size() > top_k) scores.resize(top_k);
  return scores;
}

void write_frequency_tsv(std::ostream& out,
                         std::span<const FrequencyScore> scores) {
  tsv::write_header(out, {"word", "region_i", "region_j", "delta", "exclusive"});
  for (const FrequencyScore& s : scores) {
    out << s.word << '\t' << s.region_i << '\t' << s.region_j << '\t'
        << tsv::num(s.delta) << '\t' << (s.exclusive ? 1 : 0) << '\n';
  }
}

}  // namespace geodist
