#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgr/graph.hpp"

namespace kgr {

enum class Model { TransE_L1, TransE_L2, DistMult, ComplEx };

std::string_view model_name(Model m);
/// Accepts the names printed by model_name; "TransE" alone means TransE-L2.
Model parse_model(std::string_view name);

/// Dense per-entity and per-relation vectors. ComplEx rows hold 2*dim reals:
/// the real parts followed by the imaginary parts.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(Model model, std::size_t dim, std::size_t entity_count,
                 std::size_t relation_count);

  Model model() const { return model_; }
  std::size_t dim() const { return dim_; }
  /// Reals per row.
  std::size_t width() const { return width_; }
  std::size_t entity_count() const { return width_ ? entities_.size() / width_ : 0; }
  std::size_t relation_count() const { return width_ ? relations_.size() / width_ : 0; }

  std::span<double> entity(EntityIndex e) { return row(entities_, e); }
  std::span<const double> entity(EntityIndex e) const { return row(entities_, e); }
  std::span<double> relation(RelationIndex r) { return row(relations_, r); }
  std::span<const double> relation(RelationIndex r) const { return row(relations_, r); }

  std::span<double> entity_data() { return entities_; }
  std::span<const double> entity_data() const { return entities_; }
  std::span<double> relation_data() { return relations_; }
  std::span<const double> relation_data() const { return relations_; }

  bool all_finite() const;

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

 private:
  std::span<double> row(std::vector<double>& data, std::size_t i) {
    return std::span<double>(data).subspan(i * width_, width_);
  }
  std::span<const double> row(const std::vector<double>& data, std::size_t i) const {
    return std::span<const double>(data).subspan(i * width_, width_);
  }

  Model model_ = Model::TransE_L2;
  std::size_t dim_ = 0;
  std::size_t width_ = 0;
  std::vector<double> entities_;
  std::vector<double> relations_;
};

/// Plausibility of (h, r, t) from raw rows; higher is more plausible.
///   TransE:   -||h + r - t||  (L1 or L2)
///   DistMult: sum_i h_i r_i t_i
///   ComplEx:  Re(sum_i h_i r_i conj(t_i))
double score_vectors(Model model, std::span<const double> h, std::span<const double> r,
                     std::span<const double> t);

double score(const EmbeddingStore& store, EntityIndex h, RelationIndex r, EntityIndex t);

/// Adds `scale * d score / d x` into gh, gr, gt. TransE uses the zero
/// subgradient where the norm is not differentiable.
void accumulate_score_gradient(Model model, std::span<const double> h, std::span<const double> r,
                               std::span<const double> t, double scale, std::span<double> gh,
                               std::span<double> gr, std::span<double> gt);

/// log(1 + e^x) without overflow.
double softplus(double x);
/// 1 / (1 + e^-x) without overflow.
double sigmoid(double x);

struct LabeledTriple {
  EntityIndex head = 0;
  RelationIndex relation = 0;
  EntityIndex tail = 0;
  int label = 1;  // +1 observed, -1 corrupted
};

/// Gradient rows for only the entities/relations that occur in a batch, in
/// first-touched order.
class SparseGradient {
 public:
  explicit SparseGradient(std::size_t width = 0) : width_(width) {}

  std::size_t entity_slot(EntityIndex e);
  std::size_t relation_slot(RelationIndex r);
  std::span<double> entity_row(std::size_t slot) {
    return std::span<double>(entity_values_).subspan(slot * width_, width_);
  }
  std::span<double> relation_row(std::size_t slot) {
    return std::span<double>(relation_values_).subspan(slot * width_, width_);
  }
  std::span<const double> entity_row(std::size_t slot) const {
    return std::span<const double>(entity_values_).subspan(slot * width_, width_);
  }
  std::span<const double> relation_row(std::size_t slot) const {
    return std::span<const double>(relation_values_).subspan(slot * width_, width_);
  }

  const std::vector<EntityIndex>& entities() const { return entity_ids_; }
  const std::vector<RelationIndex>& relations() const { return relation_ids_; }

  /// Empty span when `e` does not occur.
  std::span<const double> find_entity(EntityIndex e) const;
  std::span<const double> find_relation(RelationIndex r) const;

 private:
  std::size_t width_;
  std::vector<EntityIndex> entity_ids_;
  std::vector<RelationIndex> relation_ids_;
  std::unordered_map<EntityIndex, std::size_t> entity_slots_;
  std::unordered_map<RelationIndex, std::size_t> relation_slots_;
  std::vector<double> entity_values_;
  std::vector<double> relation_values_;
};

struct LossAndGrad {
  double loss = 0;
  SparseGradient grad;
};

/// loss = sum over the batch of log(1 + exp(-y f(h,r,t))), with the exact
/// partials of that sum for every row the batch touches.
LossAndGrad loss_and_grad(const EmbeddingStore& store, std::span<const LabeledTriple> batch);

enum class CorruptSide { Head, Tail };

/// Replaces one side by a uniformly drawn entity, redrawing (bounded) while
/// the result equals the input or, when `known` is given, is a known triple.
/// The result always differs from the input. Requires entity_count >= 2.
TripleKey corrupt(std::mt19937_64& rng, const TripleKey& triple, CorruptSide side,
                  std::size_t entity_count, const TripleSet* known = nullptr);

/// Corrupts the head or the tail with probability 1/2 each.
TripleKey sample_negative(std::mt19937_64& rng, const TripleKey& triple, std::size_t entity_count,
                          const TripleSet* known = nullptr);

struct TrainConfig {
  Model model = Model::TransE_L2;
  std::size_t dim = 250;
  double lr = 0.01;
  std::size_t epochs = 100;
  std::size_t negatives_per_positive = 16;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  /// Defaults to 6 / sqrt(dim).
  std::optional<double> init_scale;
  /// 1 is the bit-reproducible mode.
  std::size_t threads = 1;
  bool filter_negatives = false;

  double effective_init_scale() const;
  /// Throws ValidationError naming the first out-of-range field.
  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0;   // per labeled triple
  std::size_t labeled = 0;
};

using ProgressSink = std::function<void(const EpochStats&)>;

/// Uniform in [-init_scale, init_scale] from a generator seeded with cfg.seed.
EmbeddingStore init_store(const TrainConfig& cfg, std::size_t entity_count,
                          std::size_t relation_count);

/// SGD over shuffled mini-batches of positives, each followed by
/// negatives_per_positive corruptions. TransE entity rows touched by a step
/// are rescaled to unit L2 norm. Throws NumericError on a non-finite loss.
EmbeddingStore train(std::size_t entity_count, std::size_t relation_count,
                     std::span<const Triple> positives, const TrainConfig& cfg,
                     const ProgressSink& sink = {});

}  // namespace kgr
