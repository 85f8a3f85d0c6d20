#include "geodist/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace geodist {

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Decodes one UTF-8 code point at `i`, advancing `i`. Malformed bytes are
// passed through as Latin-1 so junk lines still tokenize predictably.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const unsigned char c = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  if (c < 0x80) {
    ++i;
    return c;
  }
  if ((c & 0xE0) == 0xC0 && cont(1)) {
    char32_t cp = (c & 0x1F) << 6 | (s[i + 1] & 0x3F);
    i += 2;
    return cp;
  }
  if ((c & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    char32_t cp =
        (c & 0x0F) << 12 | (s[i + 1] & 0x3F) << 6 | (s[i + 2] & 0x3F);
    i += 3;
    return cp;
  }
  if ((c & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    char32_t cp = (c & 0x07) << 18 | (s[i + 1] & 0x3F) << 12 |
                  (s[i + 2] & 0x3F) << 6 | (s[i + 3] & 0x3F);
    i += 4;
    return cp;
  }
  ++i;
  return c;
}

bool is_unicode_space(char32_t cp) {
  if (cp < 0x80) return is_ascii_space(static_cast<unsigned char>(cp));
  switch (cp) {
    case 0x00A0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::string normalize_token(std::string_view raw, const TokenizerConfig& cfg) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  if (cfg.strip_punctuation) {
    auto strippable = [&](char c) {
      return std::ispunct(static_cast<unsigned char>(c)) &&
             cfg.keep.find(c) == std::string::npos;
    };
    while (begin < end && strippable(raw[begin])) ++begin;
    while (end > begin && strippable(raw[end - 1])) --end;
  }
  std::string token(raw.substr(begin, end - begin));
  if (cfg.lowercase) {
    for (char& c : token)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return token;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  std::size_t start = 0;
  bool in_token = false;
  while (i < text.size()) {
    const std::size_t at = i;
    const char32_t cp = decode_utf8(text, i);
    if (is_unicode_space(cp)) {
      if (in_token) {
        parts.push_back(text.substr(start, at - start));
        in_token = false;
      }
    } else if (!in_token) {
      start = at;
      in_token = true;
    }
  }
  if (in_token) parts.push_back(text.substr(start));
  return parts;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::uint64_t parse_weight(const std::string& text) {
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("malformed count '" + text + "'");
  return value;
}

}  // namespace

bool is_valid_region(std::string_view name) {
  return !name.empty() && name != kMainRegion;
}

void require_valid_region(std::string_view name) {
  if (name.empty()) throw std::invalid_argument("empty region label");
  if (name == kMainRegion)
    throw std::invalid_argument("region label 'MAIN' is reserved");
}

std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizerConfig& config) {
  std::vector<std::string> tokens;
  for (std::string_view raw : split_whitespace(text)) {
    std::string token = normalize_token(raw, config);
    if (!token.empty()) tokens.push_back(std::move(token));
  }
  return tokens;
}

TagSet::TagSet(std::vector<std::string> tags) : tags_(std::move(tags)) {
  if (tags_.empty()) throw std::invalid_argument("empty tagset");
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (tags_[i].empty()) throw std::invalid_argument("empty tag in tagset");
    if (!index_.emplace(tags_[i], i).second)
      throw std::invalid_argument("duplicate tag '" + tags_[i] + "'");
  }
}

std::optional<std::size_t> TagSet::find(std::string_view tag) const {
  const auto it = index_.find(std::string(tag));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CorpusReader::CorpusReader(const std::string& path, CorpusFormat format,
                           TokenizerConfig tokenizer, ErrorPolicy policy)
    : in_(path), format_(format), tokenizer_(std::move(tokenizer)),
      policy_(policy) {
  if (!in_) throw std::runtime_error("cannot open corpus file: " + path);
}

CorpusReader::CorpusReader(const std::string& path, const TagSet& tagset,
                           TokenizerConfig tokenizer, ErrorPolicy policy)
    : in_(path), tagset_(&tagset), tokenizer_(std::move(tokenizer)),
      policy_(policy) {
  if (!in_) throw std::runtime_error("cannot open corpus file: " + path);
}

std::optional<Document> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++stats_.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      std::optional<Document> doc = parse(line);
      if (doc) {
        ++stats_.documents;
        return doc;
      }
    } catch (const std::exception& e) {
      if (policy_ == ErrorPolicy::strict)
        throw ParseError(stats_.lines, e.what());
      ++stats_.skipped;
    }
  }
  return std::nullopt;
}

std::optional<Document> CorpusReader::parse(const std::string& line) {
  if (tagset_) return parse_tagged(line);
  if (format_ == CorpusFormat::tweets) return parse_tweets(line);
  return parse_ngrams(line);
}

Document CorpusReader::parse_tweets(const std::string& line) const {
  const std::size_t tab = line.find('\t');
  if (tab == std::string::npos)
    throw std::invalid_argument("expected REGION<TAB>TEXT");
  Document doc;
  doc.region = line.substr(0, tab);
  require_valid_region(doc.region);
  doc.tokens = tokenize(std::string_view(line).substr(tab + 1), tokenizer_);
  if (doc.tokens.empty()) throw std::invalid_argument("empty document");
  return doc;
}

Document CorpusReader::parse_ngrams(const std::string& line) const {
  const std::vector<std::string> fields = split_fields(line, '\t');
  if (fields.size() != 4)
    throw std::invalid_argument(
        "expected REGION<TAB>SLICE<TAB>TEXT<TAB>COUNT, got " +
        std::to_string(fields.size()) + " fields");
  Document doc;
  doc.region = fields[0];
  require_valid_region(doc.region);
  doc.slice = fields[1];
  if (doc.slice.empty()) throw std::invalid_argument("empty slice label");
  doc.tokens = tokenize(fields[2], tokenizer_);
  if (doc.tokens.empty()) throw std::invalid_argument("empty document");
  doc.weight = parse_weight(fields[3]);
  if (doc.weight < 1) throw std::invalid_argument("count must be >= 1");
  return doc;
}

Document CorpusReader::parse_tagged(const std::string& line) const {
  const std::size_t tab = line.find('\t');
  if (tab == std::string::npos)
    throw std::invalid_argument("expected REGION<TAB>TEXT");
  Document doc;
  doc.region = line.substr(0, tab);
  require_valid_region(doc.region);
  for (std::string_view raw :
       split_whitespace(std::string_view(line).substr(tab + 1))) {
    const std::size_t sep = raw.rfind('_');
    if (sep == std::string_view::npos || sep == 0 || sep + 1 == raw.size())
      throw std::invalid_argument("missing tag separator in '" +
                                  std::string(raw) + "'");
    const std::string tag(raw.substr(sep + 1));
    if (!tagset_->find(tag))
      throw std::invalid_argument("unknown tag '" + tag + "'");
    std::string word(raw.substr(0, sep));
    if (tokenizer_.lowercase) {
      for (char& c : word)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (word.empty()) throw std::invalid_argument("empty token");
    doc.tokens.push_back(std::move(word));
    doc.tags.push_back(tag);
  }
  if (doc.tokens.empty()) throw std::invalid_argument("empty document");
  return doc;
}

std::vector<Document> read_corpus(const std::string& path, CorpusFormat format,
                                  const TokenizerConfig& tokenizer,
                                  ErrorPolicy policy, ReadStats* stats) {
  CorpusReader reader(path, format, tokenizer, policy);
  std::vector<Document> docs;
  while (auto doc = reader.next()) docs.push_back(std::move(*doc));
  if (stats) *stats = reader.stats();
  return docs;
}

std::vector<Document> read_tagged_corpus(const std::string& path,
                                         const TagSet& tagset,
                                         const TokenizerConfig& tokenizer,
                                         ErrorPolicy policy,
                                         ReadStats* stats) {
  CorpusReader reader(path, tagset, tokenizer, policy);
  std::vector<Document> docs;
  while (auto doc = reader.next()) docs.push_back(std::move(*doc));
  if (stats) *stats = reader.stats();
  return docs;
}

namespace {

std::string join_tokens(const Document& doc) {
  std::string text;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (i) text += ' ';
    text += doc.tokens[i];
  }
  return text;
}

}  // namespace

void write_corpus(std::ostream& out, std::span<const Document> docs,
                  CorpusFormat format) {
  for (const Document& doc : docs) {
    if (format == CorpusFormat::tweets) {
      out << doc.region << '\t' << join_tokens(doc) << '\n';
    } else {
      out << doc.region << '\t' << doc.slice << '\t' << join_tokens(doc)
          << '\t' << doc.weight << '\n';
    }
  }
}

void write_corpus(const std::string& path, std::span<const Document> docs,
                  CorpusFormat format) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  write_corpus(out, docs, format);
}

void write_tagged_corpus(std::ostream& out, std::span<const Document> docs) {
  for (const Document& doc : docs) {
    out << doc.region << '\t';
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i) out << ' ';
      out << doc.tokens[i] << '_' << doc.tags[i];
    }
    out << '\n';
  }
}

void VocabularyBuilder::add(const Document& doc) {
  require_valid_region(doc.region);
  if (doc.tokens.empty()) throw std::invalid_argument("document has no tokens");
  if (doc.weight < 1) throw std::invalid_argument("document weight must be >= 1");
  auto [it, inserted] = region_index_.emplace(doc.region, regions_.size());
  if (inserted) {
    regions_.push_back(doc.region);
    region_totals_.push_back(0);
  }
  const std::size_t region = it->second;
  const std::size_t nregions = regions_.size();
  for (const std::string& token : doc.tokens) {
    std::vector<std::uint64_t>& row = counts_[token];
    if (row.size() < nregions) row.resize(nregions, 0);
    row[region] += doc.weight;
  }
  region_totals_[region] += doc.weight * doc.tokens.size();
  ++documents_;
}

Vocabulary VocabularyBuilder::finish(std::uint64_t min_count) const {
  if (documents_ == 0) throw std::runtime_error("empty corpus");
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");

  struct Entry {
    const std::string* word;
    std::uint64_t total;
  };
  std::vector<Entry> kept;
  kept.reserve(counts_.size());
  for (const auto& [word, row] : counts_) {
    std::uint64_t total = 0;
    for (std::uint64_t c : row) total += c;
    if (total >= min_count) kept.push_back({&word, total});
  }
  std::sort(kept.begin(), kept.end(), [](const Entry& a, const Entry& b) {
    if (a.total != b.total) return a.total > b.total;
    return *a.word < *b.word;
  });

  const std::size_t nregions = regions_.size();
  std::vector<std::string> words;
  std::vector<std::uint64_t> totals;
  std::vector<std::vector<std::uint64_t>> region_counts;
  words.reserve(kept.size());
  totals.reserve(kept.size());
  region_counts.reserve(kept.size());
  for (const Entry& e : kept) {
    words.push_back(*e.word);
    totals.push_back(e.total);
    std::vector<std::uint64_t> row = counts_.at(*e.word);
    row.resize(nregions, 0);
    region_counts.push_back(std::move(row));
  }
  return Vocabulary::from_parts(std::move(words), std::move(totals),
                                std::move(region_counts), regions_,
                                region_totals_, min_count);
}

Vocabulary Vocabulary::build(std::span<const Document> docs,
                             std::uint64_t min_count) {
  VocabularyBuilder builder;
  for (const Document& doc : docs) builder.add(doc);
  return builder.finish(min_count);
}

Vocabulary Vocabulary::from_parts(
    std::vector<std::string> words, std::vector<std::uint64_t> counts,
    std::vector<std::vector<std::uint64_t>> region_counts,
    std::vector<std::string> regions, std::vector<std::uint64_t> region_totals,
    std::uint64_t min_count) {
  Vocabulary vocab;
  vocab.words_ = std::move(words);
  vocab.counts_ = std::move(counts);
  vocab.region_counts_ = std::move(region_counts);
  vocab.regions_ = std::move(regions);
  vocab.region_totals_ = std::move(region_totals);
  vocab.min_count_ = min_count;
  if (vocab.counts_.size() != vocab.words_.size() ||
      vocab.region_counts_.size() != vocab.words_.size() ||
      vocab.region_totals_.size() != vocab.regions_.size())
    throw std::invalid_argument("inconsistent vocabulary parts");
  for (std::size_t w = 0; w < vocab.words_.size(); ++w) {
    const auto& row = vocab.region_counts_[w];
    if (row.size() != vocab.regions_.size())
      throw std::invalid_argument("inconsistent region count row");
    std::uint64_t sum = 0;
    for (std::uint64_t c : row) sum += c;
    if (sum != vocab.counts_[w])
      throw std::invalid_argument("per-region counts do not sum to total for '" +
                                  vocab.words_[w] + "'");
    if (vocab.counts_[w] < vocab.min_count_)
      throw std::invalid_argument("word below min_count: " + vocab.words_[w]);
  }
  vocab.rebuild_indexes();
  return vocab;
}

void Vocabulary::rebuild_indexes() {
  index_.clear();
  for (WordId i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second)
      throw std::invalid_argument("duplicate word: " + words_[i]);
  }
  region_index_.clear();
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    require_valid_region(regions_[i]);
    if (!region_index_.emplace(regions_[i], i).second)
      throw std::invalid_argument("duplicate region: " + regions_[i]);
  }
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::require(std::string_view word) const {
  const auto id = find(word);
  if (!id) throw UnknownWordError(std::string(word));
  return *id;
}

std::optional<std::size_t> Vocabulary::find_region(
    std::string_view region) const {
  const auto it = region_index_.find(std::string(region));
  if (it == region_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::require_region(std::string_view region) const {
  const auto idx = find_region(region);
  if (!idx) throw UnknownRegionError(std::string(region));
  return *idx;
}

std::uint64_t Vocabulary::count(std::string_view word) const {
  return counts_[require(word)];
}

std::uint64_t Vocabulary::count(WordId id, std::size_t region_idx) const {
  return region_counts_[id][region_idx];
}

std::uint64_t Vocabulary::count(std::string_view word,
                                std::string_view region) const {
  return region_counts_[require(word)][require_region(region)];
}

std::uint64_t Vocabulary::total_tokens(std::size_t region_idx) const {
  return region_totals_[region_idx];
}

std::uint64_t Vocabulary::total_tokens(std::string_view region) const {
  return region_totals_[require_region(region)];
}

double Vocabulary::probability(std::string_view word,
                               std::string_view region) const {
  const WordId id = require(word);
  const std::size_t r = require_region(region);
  const std::uint64_t total = region_totals_[r];
  if (total == 0) return 0.0;
  return static_cast<double>(region_counts_[id][r]) /
         static_cast<double>(total);
}

void Vocabulary::save(std::ostream& out) const {
  out << "geodist-vocab v1 " << words_.size() << ' ' << regions_.size()
      << '\n';
  out << "#regions";
  for (const std::string& r : regions_) out << '\t' << r;
  out << '\n';
  out << "#totals";
  for (std::uint64_t t : region_totals_) out << '\t' << t;
  out << '\n';
  out << "#min_count\t" << min_count_ << '\n';
  for (WordId w = 0; w < words_.size(); ++w) {
    out << words_[w] << '\t' << counts_[w];
    for (std::uint64_t c : region_counts_[w]) out << '\t' << c;
    out << '\n';
  }
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
  save(out);
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty vocabulary file");
  std::istringstream header(line);
  std::string magic, version;
  std::size_t nwords = 0, nregions = 0;
  header >> magic >> version >> nwords >> nregions;
  if (magic != "geodist-vocab" || version != "v1")
    throw std::runtime_error("not a geodist-vocab v1 file");

  std::vector<std::string> regions;
  std::vector<std::uint64_t> totals;
  std::uint64_t min_count = 1;
  for (int meta = 0; meta < 3; ++meta) {
    if (!std::getline(in, line))
      throw std::runtime_error("truncated vocabulary header");
    const std::vector<std::string> fields = split_fields(line, '\t');
    if (fields[0] == "#regions") {
      regions.assign(fields.begin() + 1, fields.end());
    } else if (fields[0] == "#totals") {
      for (std::size_t i = 1; i < fields.size(); ++i)
        totals.push_back(parse_weight(fields[i]));
    } else if (fields[0] == "#min_count" && fields.size() == 2) {
      min_count = parse_weight(fields[1]);
    } else {
      throw std::runtime_error("unexpected vocabulary header line: " + line);
    }
  }
  if (regions.size() != nregions || totals.size() != nregions)
    throw std::runtime_error("vocabulary header region mismatch");

  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::vector<std::vector<std::uint64_t>> region_counts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line, '\t');
    if (fields.size() != 2 + nregions)
      throw std::runtime_error("malformed vocabulary row: " + line);
    words.push_back(fields[0]);
    counts.push_back(parse_weight(fields[1]));
    std::vector<std::uint64_t> row(nregions);
    for (std::size_t r = 0; r < nregions; ++r)
      row[r] = parse_weight(fields[2 + r]);
    region_counts.push_back(std::move(row));
  }
  if (words.size() != nwords)
    throw std::runtime_error("vocabulary row count mismatch");
  return from_parts(std::move(words), std::move(counts),
                    std::move(region_counts), std::move(regions),
                    std::move(totals), min_count);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  return load(in);
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  return words_ == other.words_ && counts_ == other.counts_ &&
         region_counts_ == other.region_counts_ && regions_ == other.regions_ &&
         region_totals_ == other.region_totals_ &&
         min_count_ == other.min_count_;
}

}  // namespace geodist
