#include "geodist/syndist.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "geodist/tsv.hpp"

namespace geodist {

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("distribution length mismatch");
  if (p.empty()) throw std::invalid_argument("empty distributions");
  double sum_p = 0.0, sum_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0)
      throw std::invalid_argument("negative probability entry");
    sum_p += p[i];
    sum_q += q[i];
  }
  if (std::fabs(sum_p - 1.0) > 1e-6 || std::fabs(sum_q - 1.0) > 1e-6)
    throw std::invalid_argument("distributions must sum to 1");

  double kl_p = 0.0, kl_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) kl_p += p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) kl_q += q[i] * std::log2(q[i] / m);
  }
  return 0.5 * kl_p + 0.5 * kl_q;
}

PosTable::PosTable(TagSet tagset) : tagset_(std::move(tagset)) {
  if (tagset_.size() == 0) throw std::invalid_argument("empty tagset");
}

void PosTable::add(const Document& doc) {
  if (doc.tags.size() != doc.tokens.size())
    throw std::invalid_argument("document is not tagged");
  require_valid_region(doc.region);
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const auto tag_idx = tagset_.find(doc.tags[i]);
    if (!tag_idx)
      throw std::invalid_argument("unknown tag '" + doc.tags[i] + "'");
    std::vector<std::uint64_t>& row = counts_[doc.tokens[i]][doc.region];
    if (row.empty()) row.resize(tagset_.size(), 0);
    row[*tag_idx] += doc.weight;
  }
}

void PosTable::add_all(std::span<const Document> docs) {
  for (const Document& doc : docs) add(doc);
}

const std::vector<std::uint64_t>* PosTable::find_counts(
    std::string_view word, std::string_view region) const {
  const auto wit = counts_.find(std::string(word));
  if (wit == counts_.end()) return nullptr;
  const auto rit = wit->second.find(std::string(region));
  if (rit == wit->second.end()) return nullptr;
  return &rit->second;
}

PosDistribution PosTable::distribution(std::string_view word,
                                       std::string_view region) const {
  PosDistribution dist;
  dist.word = std::string(word);
  dist.region = std::string(region);
  dist.probs.assign(tagset_.size(), 0.0);
  const std::vector<std::uint64_t>* row = find_counts(word, region);
  if (!row) return dist;  // support 0
  std::uint64_t total = 0;
  for (std::uint64_t c : *row) total += c;
  dist.support = total;
  if (total > 0) {
    for (std::size_t i = 0; i < row->size(); ++i)
      dist.probs[i] =
          static_cast<double>((*row)[i]) / static_cast<double>(total);
  }
  return dist;
}

SyntacticScore PosTable::score(std::string_view word,
                               std::string_view region_i,
                               std::string_view region_j,
                               std::uint64_t min_support) const {
  if (region_i == region_j)
    throw std::invalid_argument("region pair must be distinct");
  const PosDistribution di = distribution(word, region_i);
  const PosDistribution dj = distribution(word, region_j);
  if (di.support < min_support || dj.support < min_support)
    throw InsufficientSupportError(std::string(word), di.support, dj.support,
                                   min_support);
  SyntacticScore s;
  s.word = std::string(word);
  s.region_i = std::string(region_i);
  s.region_j = std::string(region_j);
  s.jsd = js_divergence(di.probs, dj.probs);
  s.support_i = di.support;
  s.support_j = dj.support;
  return s;
}

std::vector<SyntacticScore> PosTable::ranking(std::string_view region_i,
                                              std::string_view region_j,
                                              std::uint64_t min_support) const {
  std::vector<SyntacticScore> scores;
  for (const auto& [word, by_region] : counts_) {
    try {
      scores.push_back(score(word, region_i, region_j, min_support));
    } catch (const InsufficientSupportError&) {
      continue;
    }
  }
  std::sort(scores.begin(), scores.end(),
            [](const SyntacticScore& a, const SyntacticScore& b) {
              if (a.jsd != b.jsd) return a.jsd > b.jsd;
              return a.word < b.word;
            });
  return scores;
}

std::vector<std::string> PosTable::words() const {
  std::vector<std::string> out;
  out.reserve(counts_.size());
  for (const auto& [word, by_region] : counts_) out.push_back(word);
  std::sort(out.begin(), out.end());
  return out;
}

void write_syntactic_tsv(std::ostream& out,
                         std::span<const SyntacticScore> scores) {
  tsv::write_header(
      out, {"word", "region_i", "region_j", "jsd", "support_i", "support_j"});
  for (const SyntacticScore& s : scores) {
    out << s.word << '\t' << s.region_i << '\t' << s.region_j << '\t'
        << tsv::num(s.jsd) << '\t' << s.support_i << '\t' << s.support_j
        << '\n';
  }
}

void write_pos_bars_csv(std::ostream& out,
                        std::span<const PosDistribution> dists,
                        const TagSet& tagset) {
  out << "word,region,tag,probability\n";
  for (const PosDistribution& d : dists) {
    for (std::size_t i = 0; i < tagset.size(); ++i) {
      out << d.word << ',' << d.region << ',' << tagset.tags()[i] << ','
          << tsv::num(d.probs[i]) << '\n';
    }
  }
}

}  // namespace geodist
