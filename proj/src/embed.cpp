#include "geodist/embed.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "geodist/rng.hpp"
#include "geodist/tsv.hpp"

namespace geodist {

namespace {

constexpr char kMagic[8] = {'G', 'D', 'S', 'T', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kFormatVersion = 1;
// Final learning rate of the linear schedule, as a fraction of the start.
constexpr double kLrFloor = 0.01;
// Weighted documents up to this weight repeat; beyond it the learning
// rate is scaled instead.
constexpr std::uint32_t kMaxRepeats = 16;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// --- little-endian byte IO -------------------------------------------------

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    put_bytes(out, bytes.data(), sizeof(T));
  } else {
    put_bytes(out, &value, sizeof(T));
  }
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  put_bytes(out, s.data(), s.size());
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big)
      std::reverse(raw.begin(), raw.end());
    return std::bit_cast<T>(raw);
  }

  std::string get_string() {
    const std::uint32_t n = get_le<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void get_raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      throw std::runtime_error("truncated model file");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_matrix(std::vector<std::uint8_t>& out, const Matrix& m) {
  for (float v : m.data) put_le(out, v);
}

Matrix get_matrix(ByteReader& in, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  if constexpr (std::endian::native == std::endian::little) {
    in.get_raw(m.data.data(), m.data.size() * sizeof(float));
  } else {
    for (float& v : m.data) v = in.get_le<float>();
  }
  return m;
}

}  // namespace

void TrainingConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

EncodedCorpus EncodedCorpus::from_documents(std::span<const Document> docs,
                                            const Vocabulary& vocab) {
  EncodedCorpus corpus;
  corpus.docs.reserve(docs.size());
  for (const Document& doc : docs) {
    Doc enc;
    enc.region = static_cast<std::uint32_t>(vocab.require_region(doc.region));
    enc.weight = static_cast<std::uint32_t>(doc.weight);
    enc.ids.reserve(doc.tokens.size());
    for (const std::string& token : doc.tokens) {
      const auto id = vocab.find(token);
      enc.ids.push_back(id ? static_cast<std::int32_t>(*id) : -1);
    }
    corpus.docs.push_back(std::move(enc));
  }
  return corpus;
}

EmbeddingModel::EmbeddingModel(std::shared_ptr<const Vocabulary> vocab,
                               TrainingConfig config)
    : vocab_(std::move(vocab)), config_(config) {
  config_.validate();
  if (!vocab_) throw std::invalid_argument("null vocabulary");
  tree_ = build_huffman_tree(*vocab_);
  const std::size_t v = vocab_->size();
  const std::size_t d = config_.dim;
  main_ = Matrix(v, d);
  deltas_.assign(vocab_->regions().size(), Matrix(v, d));
  nodes_ = Matrix(v - 1, d);
  randomize_main();
}

void EmbeddingModel::randomize_main() {
  rng::Engine eng(config_.seed);
  const double scale = 0.5 / static_cast<double>(config_.dim);
  for (float& x : main_.data)
    x = static_cast<float>(rng::uniform(eng, -scale, scale));
}

std::span<const float> EmbeddingModel::main_embedding(WordId w) const {
  return {main_.row(w), main_.cols};
}

std::span<const float> EmbeddingModel::delta(std::size_t region_idx,
                                             WordId w) const {
  return {deltas_[region_idx].row(w), config_.dim};
}

std::vector<float> EmbeddingModel::region_embedding(
    WordId w, std::size_t region_idx) const {
  if (w >= vocab_->size()) throw UnknownWordError(std::to_string(w));
  if (region_idx >= deltas_.size())
    throw UnknownRegionError(std::to_string(region_idx));
  const float* m = main_.row(w);
  const float* dl = deltas_[region_idx].row(w);
  std::vector<float> phi(config_.dim);
  for (std::size_t c = 0; c < config_.dim; ++c) phi[c] = m[c] + dl[c];
  return phi;
}

std::vector<float> EmbeddingModel::region_embedding(
    std::string_view word, std::string_view region) const {
  return region_embedding(vocab_->require(word),
                          vocab_->require_region(region));
}

double EmbeddingModel::context_probability(WordId center,
                                           std::size_t region_idx,
                                           WordId context) const {
  if (center >= vocab_->size() || context >= vocab_->size())
    throw UnknownWordError("word id out of range");
  if (region_idx >= deltas_.size())
    throw UnknownRegionError(std::to_string(region_idx));
  const float* m = main_.row(center);
  const float* dl = deltas_[region_idx].row(center);
  const std::size_t d = config_.dim;
  const auto& code = tree_.codes[context];
  const auto& path = tree_.paths[context];
  double prob = 1.0;
  for (std::size_t t = 0; t < code.size(); ++t) {
    const float* node = nodes_.row(path[t]);
    double x = 0.0;
    for (std::size_t c = 0; c < d; ++c)
      x += static_cast<double>(node[c]) *
           (static_cast<double>(m[c]) + static_cast<double>(dl[c]));
    prob *= sigmoid(code[t] ? -x : x);
  }
  return prob;
}

double EmbeddingModel::context_probability(std::string_view center,
                                           std::string_view region,
                                           std::string_view context) const {
  return context_probability(vocab_->require(center),
                             vocab_->require_region(region),
                             vocab_->require(context));
}

double EmbeddingModel::pair_loss(WordId center, std::size_t region_idx,
                                 WordId context) const {
  return -std::log(context_probability(center, region_idx, context));
}

void EmbeddingModel::step_impl(WordId center, std::size_t region_idx,
                               WordId context, double lr,
                               std::vector<double>& compose,
                               std::vector<double>& grad) {
  const std::size_t d = config_.dim;
  float* m = main_.row(center);
  float* dl = deltas_[region_idx].row(center);
  compose.resize(d);
  grad.assign(d, 0.0);
  for (std::size_t c = 0; c < d; ++c)
    compose[c] = static_cast<double>(m[c]) + static_cast<double>(dl[c]);

  const auto& code = tree_.codes[context];
  const auto& path = tree_.paths[context];
  for (std::size_t t = 0; t < code.size(); ++t) {
    float* node = nodes_.row(path[t]);
    double x = 0.0;
    for (std::size_t c = 0; c < d; ++c)
      x += static_cast<double>(node[c]) * compose[c];
    // d/dx of -log sigma(+-x); target 1 for bit 0, 0 for bit 1
    const double slope = sigmoid(x) - (code[t] ? 0.0 : 1.0);
    const double step = lr * slope;
    for (std::size_t c = 0; c < d; ++c) {
      grad[c] += slope * static_cast<double>(node[c]);
      node[c] = static_cast<float>(static_cast<double>(node[c]) -
                                   step * compose[c]);
    }
  }
  // identical input-side step for the global and the regional summand
  for (std::size_t c = 0; c < d; ++c) {
    const double step = lr * grad[c];
    m[c] = static_cast<float>(static_cast<double>(m[c]) - step);
    dl[c] = static_cast<float>(static_cast<double>(dl[c]) - step);
  }
}

void EmbeddingModel::sgd_step(WordId center, std::size_t region_idx,
                              WordId context, double lr) {
  if (center >= vocab_->size() || context >= vocab_->size())
    throw UnknownWordError("word id out of range");
  if (region_idx >= deltas_.size())
    throw UnknownRegionError(std::to_string(region_idx));
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  std::vector<double> compose, grad;
  step_impl(center, region_idx, context, lr, compose, grad);
}

std::vector<std::pair<std::string, double>> EmbeddingModel::nearest_neighbors(
    std::string_view word, std::string_view region, std::size_t k) const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const WordId target = vocab_->require(word);
  const std::size_t r = vocab_->require_region(region);
  const std::vector<float> phi = region_embedding(target, r);
  double norm_t = 0.0;
  for (float x : phi) norm_t += static_cast<double>(x) * x;
  norm_t = std::sqrt(norm_t);

  std::vector<std::pair<double, WordId>> sims;
  sims.reserve(vocab_->size());
  for (WordId w = 0; w < vocab_->size(); ++w) {
    if (w == target) continue;
    const std::vector<float> other = region_embedding(w, r);
    double dot = 0.0, norm_o = 0.0;
    for (std::size_t c = 0; c < other.size(); ++c) {
      dot += static_cast<double>(phi[c]) * other[c];
      norm_o += static_cast<double>(other[c]) * other[c];
    }
    if (norm_t == 0.0 || norm_o == 0.0) continue;
    sims.emplace_back(dot / (norm_t * std::sqrt(norm_o)), w);
  }
  std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (sims.size() > k) sims.resize(k);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(sims.size());
  for (const auto& [sim, w] : sims) out.emplace_back(vocab_->word(w), sim);
  return out;
}

std::vector<std::uint8_t> EmbeddingModel::serialize() const {
  std::vector<std::uint8_t> out;
  put_bytes(out, kMagic, sizeof(kMagic));
  put_le(out, kFormatVersion);
  put_le<std::uint64_t>(out, vocab_->size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(config_.dim));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(deltas_.size()));
  // config echo
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(config_.window));
  put_le<double>(out, config_.lr);
  put_le<std::uint64_t>(out, config_.epochs);
  put_le<std::uint64_t>(out, config_.seed);
  put_le<std::uint8_t>(out, config_.lr_schedule == LrSchedule::fixed ? 0 : 1);
  put_le<std::uint32_t>(out, config_.threads);
  // regions
  for (const std::string& r : vocab_->regions()) put_string(out, r);
  // vocabulary
  put_le<std::uint64_t>(out, vocab_->min_count());
  for (std::size_t r = 0; r < vocab_->regions().size(); ++r)
    put_le<std::uint64_t>(out, vocab_->total_tokens(r));
  for (WordId w = 0; w < vocab_->size(); ++w) {
    put_string(out, vocab_->word(w));
    put_le<std::uint64_t>(out, vocab_->count(w));
    for (std::size_t r = 0; r < vocab_->regions().size(); ++r)
      put_le<std::uint64_t>(out, vocab_->count(w, r));
  }
  // parameters
  put_matrix(out, main_);
  for (const Matrix& m : deltas_) put_matrix(out, m);
  // huffman codes and paths
  for (WordId w = 0; w < vocab_->size(); ++w) {
    const auto& code = tree_.codes[w];
    const auto& path = tree_.paths[w];
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(code.size()));
    for (std::uint8_t b : code) put_le(out, b);
    for (std::uint32_t p : path) put_le(out, p);
  }
  put_matrix(out, nodes_);
  return out;
}

void EmbeddingModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  const std::vector<std::uint8_t> bytes = serialize();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

EmbeddingModel EmbeddingModel::deserialize(
    std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  char magic[8];
  in.get_raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a geodist model file");
  if (in.get_le<std::uint32_t>() != kFormatVersion)
    throw std::runtime_error("unsupported model version");
  const std::uint64_t v = in.get_le<std::uint64_t>();
  const std::uint32_t dim = in.get_le<std::uint32_t>();
  const std::uint32_t nregions = in.get_le<std::uint32_t>();

  TrainingConfig cfg;
  cfg.dim = dim;
  cfg.window = in.get_le<std::uint32_t>();
  cfg.lr = in.get_le<double>();
  cfg.epochs = in.get_le<std::uint64_t>();
  cfg.seed = in.get_le<std::uint64_t>();
  cfg.lr_schedule =
      in.get_le<std::uint8_t>() == 0 ? LrSchedule::fixed : LrSchedule::linear_decay;
  cfg.threads = in.get_le<std::uint32_t>();

  std::vector<std::string> regions(nregions);
  for (auto& r : regions) r = in.get_string();
  const std::uint64_t min_count = in.get_le<std::uint64_t>();
  std::vector<std::uint64_t> totals(nregions);
  for (auto& t : totals) t = in.get_le<std::uint64_t>();
  std::vector<std::string> words(v);
  std::vector<std::uint64_t> counts(v);
  std::vector<std::vector<std::uint64_t>> region_counts(v);
  for (std::uint64_t w = 0; w < v; ++w) {
    words[w] = in.get_string();
    counts[w] = in.get_le<std::uint64_t>();
    region_counts[w].resize(nregions);
    for (auto& c : region_counts[w]) c = in.get_le<std::uint64_t>();
  }

  auto vocab = std::make_shared<Vocabulary>(Vocabulary::from_parts(
      std::move(words), std::move(counts), std::move(region_counts),
      std::move(regions), std::move(totals), min_count));

  EmbeddingModel model(vocab, cfg);
  model.main_ = get_matrix(in, v, dim);
  for (std::uint32_t r = 0; r < nregions; ++r)
    model.deltas_[r] = get_matrix(in, v, dim);
  HuffmanTree tree;
  tree.internal_nodes = v - 1;
  tree.codes.resize(v);
  tree.paths.resize(v);
  for (std::uint64_t w = 0; w < v; ++w) {
    const std::uint16_t len = in.get_le<std::uint16_t>();
    tree.codes[w].resize(len);
    for (auto& b : tree.codes[w]) b = in.get_le<std::uint8_t>();
    tree.paths[w].resize(len);
    for (auto& p : tree.paths[w]) p = in.get_le<std::uint32_t>();
  }
  if (tree != model.tree_)
    throw std::runtime_error("model huffman tree does not match vocabulary");
  model.nodes_ = get_matrix(in, v - 1, dim);
  if (!in.done()) throw std::runtime_error("trailing bytes in model file");
  return model;
}

EmbeddingModel EmbeddingModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

void EmbeddingModel::export_text(std::ostream& out) const {
  for (WordId w = 0; w < vocab_->size(); ++w) {
    for (std::size_t r = 0; r < vocab_->regions().size(); ++r) {
      out << vocab_->word(w) << ' ' << vocab_->regions()[r];
      const std::vector<float> phi = region_embedding(w, r);
      for (float x : phi) out << ' ' << tsv::num(x);
      out << '\n';
    }
  }
}

bool EmbeddingModel::operator==(const EmbeddingModel& other) const {
  return *vocab_ == *other.vocab_ && config_ == other.config_ &&
         tree_ == other.tree_ && main_ == other.main_ &&
         deltas_ == other.deltas_ && nodes_ == other.nodes_;
}

namespace {

std::uint32_t count_pairs(const EncodedCorpus::Doc& doc, std::size_t window) {
  std::uint32_t pairs = 0;
  const std::size_t n = doc.ids.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (doc.ids[i] < 0) continue;
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(n, i + window + 1);
    for (std::size_t j = lo; j < hi; ++j)
      if (j != i && doc.ids[j] >= 0) ++pairs;
  }
  return pairs;
}

void check_finite(const Matrix& m, const char* what) {
  for (float x : m.data) {
    if (!std::isfinite(x))
      throw std::runtime_error(std::string("training diverged: non-finite ") +
                               what + " parameter");
  }
}

}  // namespace

EmbeddingModel train(const EncodedCorpus& corpus,
                     std::shared_ptr<const Vocabulary> vocab,
                     const TrainingConfig& config,
                     const TrainProgress& progress) {
  config.validate();
  if (!vocab) throw std::invalid_argument("null vocabulary");
  if (corpus.docs.empty()) throw std::runtime_error("empty corpus");
  for (const auto& doc : corpus.docs) {
    if (doc.region >= vocab->regions().size())
      throw UnknownRegionError(std::to_string(doc.region));
  }

  EmbeddingModel model(vocab, config);

  // Epoch stream: every document once per repeat pass; heavy documents
  // run once with the learning rate scaled by their weight instead.
  std::vector<std::uint32_t> entries;
  std::vector<std::uint32_t> pairs(corpus.docs.size());
  std::uint64_t steps_per_epoch = 0;
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    pairs[d] = count_pairs(corpus.docs[d], config.window);
    const std::uint32_t repeats =
        corpus.docs[d].weight <= kMaxRepeats ? corpus.docs[d].weight : 1;
    for (std::uint32_t k = 0; k < repeats; ++k)
      entries.push_back(static_cast<std::uint32_t>(d));
    steps_per_epoch += static_cast<std::uint64_t>(repeats) * pairs[d];
  }
  const std::uint64_t total_steps = steps_per_epoch * config.epochs;
  if (total_steps == 0)
    throw std::runtime_error("corpus yields no training pairs");

  std::atomic<std::uint64_t> global_step{0};
  const auto lr_at = [&](std::uint64_t step) {
    if (config.lr_schedule == LrSchedule::fixed) return config.lr;
    const double progress_frac =
        static_cast<double>(step) / static_cast<double>(total_steps);
    return config.lr * std::max(1.0 - (1.0 - kLrFloor) * progress_frac,
                                kLrFloor);
  };

  const auto run_chunk = [&](std::span<const std::uint32_t> chunk) {
    std::vector<double> compose, grad;
    for (std::uint32_t d : chunk) {
      const EncodedCorpus::Doc& doc = corpus.docs[d];
      const double scale = doc.weight <= kMaxRepeats
                               ? 1.0
                               : static_cast<double>(doc.weight);
      const std::size_t n = doc.ids.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (doc.ids[i] < 0) continue;
        const std::size_t lo = i > config.window ? i - config.window : 0;
        const std::size_t hi = std::min(n, i + config.window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
          if (j == i || doc.ids[j] < 0) continue;
          const std::uint64_t step =
              global_step.fetch_add(1, std::memory_order_relaxed);
          model.step_impl(static_cast<WordId>(doc.ids[i]), doc.region,
                          static_cast<WordId>(doc.ids[j]),
                          lr_at(step) * scale, compose, grad);
        }
      }
    }
  };

  rng::Engine order_eng(config.seed ^ 0xD1B54A32D192ED03ull);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng::shuffle(entries, order_eng);
    if (config.threads <= 1) {
      run_chunk(entries);
    } else {
      const std::size_t nthreads =
          std::min<std::size_t>(config.threads, entries.size());
      std::vector<std::thread> workers;
      const std::size_t per = (entries.size() + nthreads - 1) / nthreads;
      for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t lo = t * per;
        const std::size_t hi = std::min(entries.size(), lo + per);
        if (lo >= hi) break;
        workers.emplace_back(run_chunk,
                             std::span<const std::uint32_t>(
                                 entries.data() + lo, hi - lo));
      }
      for (auto& w : workers) w.join();
    }
    check_finite(model.main(), "main");
    for (std::size_t r = 0; r < vocab->regions().size(); ++r)
      check_finite(model.deltas(r), "delta");
    check_finite(model.nodes(), "node");
    if (progress) progress(epoch + 1, lr_at(global_step.load()));
  }
  return model;
}

EmbeddingModel train(std::span<const Document> docs,
                     std::shared_ptr<const Vocabulary> vocab,
                     const TrainingConfig& config,
                     const TrainProgress& progress) {
  if (!vocab) throw std::invalid_argument("null vocabulary");
  return train(EncodedCorpus::from_documents(docs, *vocab), vocab, config,
               progress);
}

double corpus_loss(const EmbeddingModel& model, const EncodedCorpus& corpus) {
  double total = 0.0;
  std::uint64_t count = 0;
  const std::size_t window = model.config().window;
  for (const EncodedCorpus::Doc& doc : corpus.docs) {
    const std::size_t n = doc.ids.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (doc.ids[i] < 0) continue;
      const std::size_t lo = i > window ? i - window : 0;
      const std::size_t hi = std::min(n, i + window + 1);
      for (std::size_t j = lo; j < hi; ++j) {
        if (j == i || doc.ids[j] < 0) continue;
        total += doc.weight * model.pair_loss(static_cast<WordId>(doc.ids[i]),
                                              doc.region,
                                              static_cast<WordId>(doc.ids[j]));
        count += doc.weight;
      }
    }
  }
  if (count == 0) throw std::runtime_error("corpus yields no training pairs");
  return total / static_cast<double>(count);
}

}  // namespace geodist
