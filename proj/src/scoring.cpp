#include "geodist/scoring.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "geodist/tsv.hpp"

namespace geodist {

namespace {

template <typename T>
double cosine_distance_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("vector length mismatch");
  if (u.empty()) throw std::invalid_argument("empty vectors");
  bool identical = true;
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    identical = identical && a == b;
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0)
    throw ZeroVectorError("cosine distance undefined for zero vector");
  if (identical) return 0.0;
  return 1.0 - dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  return cosine_distance_impl(u, v);
}

double cosine_distance(std::span<const float> u, std::span<const float> v) {
  return cosine_distance_impl(u, v);
}

double distance_score(const EmbeddingModel& model, WordId word,
                      std::size_t region_i, std::size_t region_j) {
  const std::vector<float> phi_i = model.region_embedding(word, region_i);
  const std::vector<float> phi_j = model.region_embedding(word, region_j);
  return cosine_distance(std::span<const float>(phi_i),
                         std::span<const float>(phi_j));
}

double distance_score(const EmbeddingModel& model, std::string_view word,
                      std::string_view region_i, std::string_view region_j) {
  return distance_score(model, model.vocab().require(word),
                        model.vocab().require_region(region_i),
                        model.vocab().require_region(region_j));
}

std::vector<double> standardize(std::span<const double> raw) {
  if (raw.size() < 2)
    throw std::invalid_argument("need at least 2 scores to standardize");
  double mean = 0.0;
  for (double x : raw) mean += x;
  mean /= static_cast<double>(raw.size());
  double var = 0.0;
  for (double x : raw) var += (x - mean) * (x - mean);
  var /= static_cast<double>(raw.size());
  if (var == 0.0) throw DegeneratePopulationError();
  const double sd = std::sqrt(var);
  std::vector<double> z;
  z.reserve(raw.size());
  for (double x : raw) z.push_back((x - mean) / sd);
  return z;
}

bool scorable(const Vocabulary& vocab, WordId word, std::size_t region_i,
              std::size_t region_j) {
  return vocab.count(word, region_i) >= vocab.min_count() &&
         vocab.count(word, region_j) >= vocab.min_count();
}

const WordScore* ScoreTable::find(std::string_view word) const {
  for (const WordScore& row : rows)
    if (row.word == word) return &row;
  return nullptr;
}

std::vector<std::string> ScoreTable::scorable_words() const {
  std::vector<std::string> out;
  for (const WordScore& row : rows)
    if (row.scorable) out.push_back(row.word);
  return out;
}

ScoreTable build_score_table(const EmbeddingModel& model,
                             std::string_view region_i,
                             std::string_view region_j) {
  const Vocabulary& vocab = model.vocab();
  const std::size_t ri = vocab.require_region(region_i);
  const std::size_t rj = vocab.require_region(region_j);
  if (ri == rj) throw std::invalid_argument("region pair must be distinct");

  ScoreTable table;
  table.region_i = std::string(region_i);
  table.region_j = std::string(region_j);
  table.rows.reserve(vocab.size());

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> population;
  std::vector<std::size_t> population_rows;
  for (WordId w = 0; w < vocab.size(); ++w) {
    WordScore row;
    row.word = vocab.word(w);
    row.z = nan;
    try {
      row.raw = distance_score(model, w, ri, rj);
    } catch (const ZeroVectorError&) {
      // zero embedding (possible before training); reported but unscorable
      row.raw = nan;
      table.rows.push_back(std::move(row));
      continue;
    }
    row.scorable = scorable(vocab, w, ri, rj);
    if (row.scorable) {
      population.push_back(row.raw);
      population_rows.push_back(table.rows.size());
    }
    table.rows.push_back(std::move(row));
  }

  const std::vector<double> z = standardize(population);
  double mean = 0.0;
  for (double x : population) mean += x;
  mean /= static_cast<double>(population.size());
  double var = 0.0;
  for (double x : population) var += (x - mean) * (x - mean);
  var /= static_cast<double>(population.size());
  table.mean = mean;
  table.stddev = std::sqrt(var);
  for (std::size_t i = 0; i < population_rows.size(); ++i)
    table.rows[population_rows[i]].z = z[i];
  return table;
}

void write_score_tsv(std::ostream& out, const ScoreTable& table) {
  tsv::write_header(out, {"word", "region_i", "region_j", "raw", "z",
                          "scorable"});
  for (const WordScore& row : table.rows) {
    out << row.word << '\t' << table.region_i << '\t' << table.region_j
        << '\t' << tsv::num(row.raw) << '\t' << tsv::num(row.z) << '\t'
        << (row.scorable ? 1 : 0) << '\n';
  }
}

}  // namespace geodist
