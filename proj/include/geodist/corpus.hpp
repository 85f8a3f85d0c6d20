#pragma once

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geodist/errors.hpp"

namespace geodist {

/// Region labels are plain case-sensitive strings. "MAIN" is reserved for
/// the shared global embedding and never appears on a document.
inline constexpr std::string_view kMainRegion = "MAIN";

bool is_valid_region(std::string_view name);
void require_valid_region(std::string_view name);

struct TokenizerConfig {
  bool lowercase = true;
  bool strip_punctuation = true;
  // Characters never treated as strippable punctuation, so handles and
  // hashtags survive whole.
  std::string keep = "#@";
};

/// Lowercase, split on Unicode whitespace, strip leading/trailing ASCII
/// punctuation except the configured keep set. Tokens that strip to
/// nothing are dropped.
std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizerConfig& config = {});

struct Document {
  std::string region;
  std::vector<std::string> tokens;
  std::vector<std::string> tags;  // empty, or one tag per token
  std::string slice;              // empty when the record carries no slice
  std::uint64_t weight = 1;

  bool operator==(const Document&) const = default;
};

enum class CorpusFormat { tweets, ngrams };

/// strict: a malformed record aborts the read. lenient: it is skipped and
/// counted.
enum class ErrorPolicy { strict, lenient };

struct ReadStats {
  std::uint64_t lines = 0;
  std::uint64_t documents = 0;
  std::uint64_t skipped = 0;
};

/// A declared set of POS tags. Order is the probability-vector layout for
/// the syntactic method.
class TagSet {
 public:
  TagSet() = default;
  explicit TagSet(std::vector<std::string> tags);

  std::size_t size() const { return tags_.size(); }
  const std::vector<std::string>& tags() const { return tags_; }
  std::optional<std::size_t> find(std::string_view tag) const;

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Pull-based reader over one corpus file. next() yields documents until
/// EOF; in lenient mode malformed records are skipped and counted in
/// stats(), in strict mode they raise ParseError.
class CorpusReader {
 public:
  CorpusReader(const std::string& path, CorpusFormat format,
               TokenizerConfig tokenizer = {},
               ErrorPolicy policy = ErrorPolicy::lenient);

  /// Tagged variant: tweets layout with every token as token_TAG.
  CorpusReader(const std::string& path, const TagSet& tagset,
               TokenizerConfig tokenizer = {},
               ErrorPolicy policy = ErrorPolicy::lenient);

  std::optional<Document> next();
  const ReadStats& stats() const { return stats_; }

 private:
  std::optional<Document> parse(const std::string& line);
  Document parse_tweets(const std::string& line) const;
  Document parse_ngrams(const std::string& line) const;
  Document parse_tagged(const std::string& line) const;

  std::ifstream in_;
  CorpusFormat format_ = CorpusFormat::tweets;
  const TagSet* tagset_ = nullptr;  // non-null selects the tagged layout
  TokenizerConfig tokenizer_;
  ErrorPolicy policy_;
  ReadStats stats_;
};

std::vector<Document> read_corpus(const std::string& path, CorpusFormat format,
                                  const TokenizerConfig& tokenizer = {},
                                  ErrorPolicy policy = ErrorPolicy::lenient,
                                  ReadStats* stats = nullptr);

std::vector<Document> read_tagged_corpus(
    const std::string& path, const TagSet& tagset,
    const TokenizerConfig& tokenizer = {},
    ErrorPolicy policy = ErrorPolicy::lenient, ReadStats* stats = nullptr);

void write_corpus(std::ostream& out, std::span<const Document> docs,
                  CorpusFormat format);
void write_corpus(const std::string& path, std::span<const Document> docs,
                  CorpusFormat format);
void write_tagged_corpus(std::ostream& out, std::span<const Document> docs);

using WordId = std::uint32_t;

/// Immutable word <-> dense-index map with per-region counts. Words are
/// indexed by descending total count (ties broken lexicographically);
/// region order is first appearance in the ingested stream. total_tokens
/// counts every ingested token of a region, including tokens of words
/// later dropped by min_count, so word probabilities stay probabilities
/// of the underlying corpus.
class Vocabulary {
 public:
  static Vocabulary build(std::span<const Document> docs,
                          std::uint64_t min_count);

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(WordId id) const { return words_[id]; }
  std::optional<WordId> find(std::string_view word) const;
  WordId require(std::string_view word) const;  // throws UnknownWordError

  const std::vector<std::string>& regions() const { return regions_; }
  std::optional<std::size_t> find_region(std::string_view region) const;
  std::size_t require_region(std::string_view region) const;

  std::uint64_t count(WordId id) const { return counts_[id]; }
  std::uint64_t count(std::string_view word) const;
  std::uint64_t count(WordId id, std::size_t region_idx) const;
  std::uint64_t count(std::string_view word, std::string_view region) const;
  std::uint64_t total_tokens(std::size_t region_idx) const;
  std::uint64_t total_tokens(std::string_view region) const;
  std::uint64_t min_count() const { return min_count_; }

  /// P(w | r) = count(w, r) / total_tokens(r).
  double probability(std::string_view word, std::string_view region) const;

  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static Vocabulary load(std::istream& in);
  static Vocabulary load(const std::string& path);

  /// Assembles a vocabulary from already-validated parts; used by
  /// deserialization. Word order is preserved as given.
  static Vocabulary from_parts(std::vector<std::string> words,
                               std::vector<std::uint64_t> counts,
                               std::vector<std::vector<std::uint64_t>> region_counts,
                               std::vector<std::string> regions,
                               std::vector<std::uint64_t> region_totals,
                               std::uint64_t min_count);

  bool operator==(const Vocabulary& other) const;

 private:
  Vocabulary() = default;
  void rebuild_indexes();

  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::vector<std::uint64_t>> region_counts_;  // [word][region]
  std::vector<std::string> regions_;
  std::unordered_map<std::string, std::size_t> region_index_;
  std::vector<std::uint64_t> region_totals_;
  std::uint64_t min_count_ = 1;
};

/// Streaming accumulator behind Vocabulary::build. add() may be called
/// shard-by-shard; counts merge by addition.
class VocabularyBuilder {
 public:
  void add(const Document& doc);
  std::uint64_t documents() const { return documents_; }
  std::size_t distinct_regions() const { return regions_.size(); }
  Vocabulary finish(std::uint64_t min_count) const;

 private:
  std::unordered_map<std::string, std::vector<std::uint64_t>> counts_;
  std::vector<std::string> regions_;
  std::unordered_map<std::string, std::size_t> region_index_;
  std::vector<std::uint64_t> region_totals_;
  std::uint64_t documents_ = 0;
};

}  // namespace geodist
