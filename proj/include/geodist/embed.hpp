#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "geodist/corpus.hpp"
#include "geodist/huffman.hpp"

namespace geodist {

enum class LrSchedule { fixed, linear_decay };

struct TrainingConfig {
  std::size_t dim = 200;
  std::size_t window = 10;
  double lr = 0.025;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;
  LrSchedule lr_schedule = LrSchedule::linear_decay;
  unsigned threads = 1;

  void validate() const;
  bool operator==(const TrainingConfig&) const = default;
};

/// Dense row-major float matrix; 32-bit storage matches the on-disk model
/// layout, all arithmetic happens in double.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}
  float* row(std::size_t i) { return data.data() + i * cols; }
  const float* row(std::size_t i) const { return data.data() + i * cols; }
  bool operator==(const Matrix&) const = default;
};

/// Token-id view of a document stream, resolved against one vocabulary.
/// Out-of-vocabulary tokens keep their position as -1 so context windows
/// span the original token offsets.
struct EncodedCorpus {
  struct Doc {
    std::vector<std::int32_t> ids;
    std::uint32_t region = 0;
    std::uint32_t weight = 1;
  };
  std::vector<Doc> docs;

  static EncodedCorpus from_documents(std::span<const Document> docs,
                                      const Vocabulary& vocab);
};

/// Region-conditioned skip-gram model with hierarchical softmax.
///
/// Every word has a global vector (the MAIN embedding) plus one
/// differential vector per region; the vector used for region r is always
/// main(w) + delta_r(w). Differentials start at zero, so before any
/// training step all regions coincide.
class EmbeddingModel {
 public:
  EmbeddingModel(std::shared_ptr<const Vocabulary> vocab,
                 TrainingConfig config);

  const Vocabulary& vocab() const { return *vocab_; }
  std::shared_ptr<const Vocabulary> vocab_ptr() const { return vocab_; }
  const TrainingConfig& config() const { return config_; }
  const HuffmanTree& tree() const { return tree_; }
  std::size_t dim() const { return config_.dim; }
  const std::vector<std::string>& regions() const { return vocab_->regions(); }

  std::span<const float> main_embedding(WordId w) const;
  std::span<const float> delta(std::size_t region_idx, WordId w) const;

  /// phi_r(w) = main(w) + delta_r(w).
  std::vector<float> region_embedding(WordId w, std::size_t region_idx) const;
  std::vector<float> region_embedding(std::string_view word,
                                      std::string_view region) const;

  /// Hierarchical-softmax probability of the context word given the
  /// center word under the active set {region, MAIN}; always in (0, 1).
  double context_probability(WordId center, std::size_t region_idx,
                             WordId context) const;
  double context_probability(std::string_view center, std::string_view region,
                             std::string_view context) const;

  /// -log context_probability; the per-pair training loss.
  double pair_loss(WordId center, std::size_t region_idx,
                   WordId context) const;

  /// One SGD step on -log Pr(context | center, region). Internal-node
  /// vectors along the context word's path are updated, and the same
  /// input-side gradient is applied to both main(center) and
  /// delta_region(center).
  void sgd_step(WordId center, std::size_t region_idx, WordId context,
                double lr);

  /// Top-k words by cosine similarity to phi_region(word), the word
  /// itself excluded; ties broken by vocabulary index.
  std::vector<std::pair<std::string, double>> nearest_neighbors(
      std::string_view word, std::string_view region, std::size_t k) const;

  std::vector<std::uint8_t> serialize() const;
  void save(const std::string& path) const;
  static EmbeddingModel deserialize(std::span<const std::uint8_t> bytes);
  static EmbeddingModel load(const std::string& path);

  /// Interop text dump: `word region v1 ... vd` per (word, region).
  void export_text(std::ostream& out) const;

  bool operator==(const EmbeddingModel& other) const;

  // Mutable views for the trainer.
  Matrix& main() { return main_; }
  const Matrix& main() const { return main_; }
  Matrix& deltas(std::size_t region_idx) { return deltas_[region_idx]; }
  const Matrix& deltas(std::size_t region_idx) const {
    return deltas_[region_idx];
  }
  Matrix& nodes() { return nodes_; }
  const Matrix& nodes() const { return nodes_; }

 private:
  friend EmbeddingModel train(const EncodedCorpus&,
                              std::shared_ptr<const Vocabulary>,
                              const TrainingConfig&,
                              const std::function<void(std::size_t, double)>&);
  void step_impl(WordId center, std::size_t region_idx, WordId context,
                 double lr, std::vector<double>& compose,
                 std::vector<double>& grad);
  void randomize_main();

  std::shared_ptr<const Vocabulary> vocab_;
  TrainingConfig config_;
  HuffmanTree tree_;
  Matrix main_;                 // |V| x d, random init
  std::vector<Matrix> deltas_;  // per region, |V| x d, zero init
  Matrix nodes_;                // (|V|-1) x d, zero init
};

using TrainProgress = std::function<void(std::size_t epoch, double lr)>;

/// Full training pass per the skip-gram objective: for every epoch, every
/// document, every in-vocabulary (center, context) pair within the
/// window, one sgd_step with the document's region active. Documents with
/// weight w <= 16 repeat w times in the epoch stream; heavier documents
/// run once with the learning rate scaled by w. Document order reshuffles
/// each epoch from the seeded RNG. threads == 1 is bit-reproducible.
EmbeddingModel train(const EncodedCorpus& corpus,
                     std::shared_ptr<const Vocabulary> vocab,
                     const TrainingConfig& config,
                     const TrainProgress& progress = nullptr);

EmbeddingModel train(std::span<const Document> docs,
                     std::shared_ptr<const Vocabulary> vocab,
                     const TrainingConfig& config,
                     const TrainProgress& progress = nullptr);

/// Mean pair loss over the whole corpus under the current parameters;
/// the quantity train() descends.
double corpus_loss(const EmbeddingModel& model, const EncodedCorpus& corpus);

}  // namespace geodist
