#include "kgr/embed.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "kgr/error.hpp"

namespace kgr {

std::string_view model_name(Model m) {
  switch (m) {
    case Model::TransE_L1: return "TransE-L1";
    case Model::TransE_L2: return "TransE-L2";
    case Model::DistMult: return "DistMult";
    case Model::ComplEx: return "ComplEx";
  }
  return "unknown";
}

Model parse_model(std::string_view name) {
  // Case and '-'/'_' insensitive: "TransE-L2", "transe_l2" and "TRANSE_L2" all match.
  std::string key;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (key == "transel1") return Model::TransE_L1;
  if (key == "transel2" || key == "transe") return Model::TransE_L2;
  if (key == "distmult") return Model::DistMult;
  if (key == "complex") return Model::ComplEx;
  throw ValidationError("unknown model '" + std::string(name) +
                        "' (expected TransE-L1, TransE-L2, DistMult or ComplEx)");
}

EmbeddingStore::EmbeddingStore(Model model, std::size_t dim, std::size_t entity_count,
                               std::size_t relation_count)
    : model_(model),
      dim_(dim),
      width_(model == Model::ComplEx ? 2 * dim : dim),
      entities_(entity_count * width_, 0.0),
      relations_(relation_count * width_, 0.0) {}

bool EmbeddingStore::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(entities_.begin(), entities_.end(), finite) &&
         std::all_of(relations_.begin(), relations_.end(), finite);
}

double score_vectors(Model model, std::span<const double> h, std::span<const double> r,
                     std::span<const double> t) {
  const std::size_t n = h.size();
  switch (model) {
    case Model::TransE_L1: {
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) sum += std::abs(h[i] + r[i] - t[i]);
      return -sum;
    }
    case Model::TransE_L2: {
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = h[i] + r[i] - t[i];
        sum += v * v;
      }
      return -std::sqrt(sum);
    }
    case Model::DistMult: {
      // r * (h * t) keeps the score bitwise symmetric in h and t.
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) sum += r[i] * (h[i] * t[i]);
      return sum;
    }
    case Model::ComplEx: {
      const std::size_t d = n / 2;
      double sum = 0;
      for (std::size_t i = 0; i < d; ++i) {
        const double a = h[i], b = h[d + i];
        const double c = r[i], e_im = r[d + i];
        const double e = t[i], f = t[d + i];
        // Re((a + ib)(c + i e_im)(e - if))
        sum += c * (a * e + b * f) + e_im * (a * f - b * e);
      }
      return sum;
    }
  }
  return 0;
}

double score(const EmbeddingStore& store, EntityIndex h, RelationIndex r, EntityIndex t) {
  return score_vectors(store.model(), store.entity(h), store.relation(r), store.entity(t));
}

void accumulate_score_gradient(Model model, std::span<const double> h, std::span<const double> r,
                               std::span<const double> t, double scale, std::span<double> gh,
                               std::span<double> gr, std::span<double> gt) {
  const std::size_t n = h.size();
  switch (model) {
    case Model::TransE_L1:
      for (std::size_t i = 0; i < n; ++i) {
        const double v = h[i] + r[i] - t[i];
        const double s = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
        gh[i] -= scale * s;
        gr[i] -= scale * s;
        gt[i] += scale * s;
      }
      return;
    case Model::TransE_L2: {
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = h[i] + r[i] - t[i];
        sum += v * v;
      }
      const double norm = std::sqrt(sum);
      if (norm == 0) return;
      const double k = scale / norm;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = h[i] + r[i] - t[i];
        gh[i] -= k * v;
        gr[i] -= k * v;
        gt[i] += k * v;
      }
      return;
    }
    case Model::DistMult:
      for (std::size_t i = 0; i < n; ++i) {
        gh[i] += scale * r[i] * t[i];
        gr[i] += scale * h[i] * t[i];
        gt[i] += scale * h[i] * r[i];
      }
      return;
    case Model::ComplEx: {
      const std::size_t d = n / 2;
      for (std::size_t i = 0; i < d; ++i) {
        const double a = h[i], b = h[d + i];
        const double c = r[i], e_im = r[d + i];
        const double e = t[i], f = t[d + i];
        gh[i] += scale * (c * e + e_im * f);
        gh[d + i] += scale * (c * f - e_im * e);
        gr[i] += scale * (a * e + b * f);
        gr[d + i] += scale * (a * f - b * e);
        gt[i] += scale * (a * c - b * e_im);
        gt[d + i] += scale * (b * c + a * e_im);
      }
      return;
    }
  }
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t SparseGradient::entity_slot(EntityIndex e) {
  auto [it, inserted] = entity_slots_.try_emplace(e, entity_ids_.size());
  if (inserted) {
    entity_ids_.push_back(e);
    entity_values_.resize(entity_values_.size() + width_, 0.0);
  }
  return it->second;
}

std::size_t SparseGradient::relation_slot(RelationIndex r) {
  auto [it, inserted] = relation_slots_.try_emplace(r, relation_ids_.size());
  if (inserted) {
    relation_ids_.push_back(r);
    relation_values_.resize(relation_values_.size() + width_, 0.0);
  }
  return it->second;
}

std::span<const double> SparseGradient::find_entity(EntityIndex e) const {
  auto it = entity_slots_.find(e);
  if (it == entity_slots_.end()) return {};
  return entity_row(it->second);
}

std::span<const double> SparseGradient::find_relation(RelationIndex r) const {
  auto it = relation_slots_.find(r);
  if (it == relation_slots_.end()) return {};
  return relation_row(it->second);
}

LossAndGrad loss_and_grad(const EmbeddingStore& store, std::span<const LabeledTriple> batch) {
  LossAndGrad out{0.0, SparseGradient(store.width())};
  auto& g = out.grad;
  for (const auto& lt : batch) {
    const auto h = store.entity(lt.head);
    const auto r = store.relation(lt.relation);
    const auto t = store.entity(lt.tail);
    const double y = lt.label > 0 ? 1.0 : -1.0;
    const double margin = y * score_vectors(store.model(), h, r, t);
    out.loss += softplus(-margin);
    // d/df log(1 + exp(-y f)) = -y sigmoid(-y f)
    const double dloss = -y * sigmoid(-margin);
    const auto hs = g.entity_slot(lt.head);
    const auto rs = g.relation_slot(lt.relation);
    const auto ts = g.entity_slot(lt.tail);
    if (hs == ts) {
      // Self-loop: both partials land in the same row.
      std::vector<double> gt(store.width(), 0.0);
      accumulate_score_gradient(store.model(), h, r, t, dloss, g.entity_row(hs),
                                g.relation_row(rs), gt);
      auto row = g.entity_row(hs);
      for (std::size_t i = 0; i < row.size(); ++i) row[i] += gt[i];
    } else {
      accumulate_score_gradient(store.model(), h, r, t, dloss, g.entity_row(hs),
                                g.relation_row(rs), g.entity_row(ts));
    }
  }
  return out;
}

TripleKey corrupt(std::mt19937_64& rng, const TripleKey& triple, CorruptSide side,
                  std::size_t entity_count, const TripleSet* known) {
  if (entity_count < 2) throw ValidationError("negative sampling needs at least 2 entities");
  std::uniform_int_distribution<EntityIndex> pick(0, static_cast<EntityIndex>(entity_count - 1));
  constexpr int kMaxRetries = 32;
  const EntityIndex original = side == CorruptSide::Head ? triple.head : triple.tail;
  TripleKey out = triple;
  auto& slot = side == CorruptSide::Head ? out.head : out.tail;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    slot = pick(rng);
    if (slot == original) continue;
    if (known && known->count(out)) continue;
    return out;
  }
  // Out of retries: any entity other than the original still satisfies the
  // contract, even if it happens to be a known triple.
  slot = pick(rng);
  if (slot == original) slot = static_cast<EntityIndex>((original + 1) % entity_count);
  return out;
}

TripleKey sample_negative(std::mt19937_64& rng, const TripleKey& triple, std::size_t entity_count,
                          const TripleSet* known) {
  std::bernoulli_distribution coin(0.5);
  return corrupt(rng, triple, coin(rng) ? CorruptSide::Head : CorruptSide::Tail, entity_count,
                 known);
}

double TrainConfig::effective_init_scale() const {
  return init_scale ? *init_scale : 6.0 / std::sqrt(static_cast<double>(dim));
}

void TrainConfig::validate() const {
  if (dim == 0) throw ValidationError("train: dim must be positive");
  if (!(lr > 0) || !std::isfinite(lr)) throw ValidationError("train: lr must be positive");
  if (negatives_per_positive == 0) {
    throw ValidationError("train: negatives_per_positive must be positive");
  }
  if (batch_size == 0) throw ValidationError("train: batch_size must be positive");
  if (init_scale && !(*init_scale > 0)) {
    throw ValidationError("train: init_scale must be positive");
  }
  if (threads == 0) throw ValidationError("train: threads must be positive");
}

EmbeddingStore init_store(const TrainConfig& cfg, std::size_t entity_count,
                          std::size_t relation_count) {
  EmbeddingStore store(cfg.model, cfg.dim, entity_count, relation_count);
  std::mt19937_64 rng(cfg.seed);
  const double s = cfg.effective_init_scale();
  std::uniform_real_distribution<double> u(-s, s);
  for (auto& v : store.entity_data()) v = u(rng);
  for (auto& v : store.relation_data()) v = u(rng);
  return store;
}

namespace {

bool is_transe(Model m) { return m == Model::TransE_L1 || m == Model::TransE_L2; }

void normalize(std::span<double> row) {
  double sum = 0;
  for (double v : row) sum += v * v;
  const double norm = std::sqrt(sum);
  if (norm > 0) {
    for (auto& v : row) v /= norm;
  }
}

// Positives of one batch, each followed by its corruptions.
void fill_batch(std::span<const Triple> positives, std::span<const std::size_t> order,
                std::size_t begin, std::size_t end, const TrainConfig& cfg,
                std::size_t entity_count, const TripleSet* known, std::mt19937_64& rng,
                std::vector<LabeledTriple>& batch) {
  batch.clear();
  for (std::size_t i = begin; i < end; ++i) {
    const auto& p = positives[order[i]];
    batch.push_back({p.head, p.relation, p.tail, 1});
    for (std::size_t k = 0; k < cfg.negatives_per_positive; ++k) {
      const auto neg = sample_negative(rng, key_of(p), entity_count, known);
      batch.push_back({neg.head, neg.relation, neg.tail, -1});
    }
  }
}

[[noreturn]] void diverged(std::size_t epoch, std::size_t batch, double lr) {
  std::ostringstream msg;
  msg << "training diverged: non-finite loss at epoch " << epoch << ", batch " << batch
      << " (lr=" << lr << ")";
  throw NumericError(msg.str());
}

void apply_step(EmbeddingStore& store, const SparseGradient& g, double lr) {
  for (std::size_t s = 0; s < g.entities().size(); ++s) {
    auto row = store.entity(g.entities()[s]);
    auto grad = g.entity_row(s);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] -= lr * grad[i];
    if (is_transe(store.model())) normalize(row);
  }
  for (std::size_t s = 0; s < g.relations().size(); ++s) {
    auto row = store.relation(g.relations()[s]);
    auto grad = g.relation_row(s);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] -= lr * grad[i];
  }
}

EmbeddingStore train_sequential(EmbeddingStore store, std::span<const Triple> positives,
                                const TrainConfig& cfg, const TripleSet* known,
                                const ProgressSink& sink) {
  std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995ULL);
  std::vector<std::size_t> order(positives.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<LabeledTriple> batch;
  const std::size_t n_entities = store.entity_count();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    std::size_t labeled = 0;
    std::size_t batch_no = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      fill_batch(positives, order, begin, end, cfg, n_entities, known, rng, batch);
      auto lg = loss_and_grad(store, batch);
      if (!std::isfinite(lg.loss)) diverged(epoch, batch_no, cfg.lr);
      apply_step(store, lg.grad, cfg.lr);
      assert(store.all_finite());
      total += lg.loss;
      labeled += batch.size();
    }
    if (sink) sink(EpochStats{epoch, total / static_cast<double>(labeled), labeled});
  }
  return store;
}

// Parallel mode: worker threads take interleaved batches and update the
// shared store without a global barrier. Rows are copied in and written back
// under per-row stripe locks, so updates from different batches interleave.
class StripedLocks {
 public:
  explicit StripedLocks(std::size_t n) : locks_(n) {}
  std::mutex& entity(EntityIndex e) { return locks_[(2 * static_cast<std::size_t>(e)) % locks_.size()]; }
  std::mutex& relation(RelationIndex r) {
    return locks_[(2 * static_cast<std::size_t>(r) + 1) % locks_.size()];
  }

 private:
  std::vector<std::mutex> locks_;
};

struct WorkerResult {
  double loss = 0;
  std::size_t labeled = 0;
  bool diverged = false;
  std::size_t diverged_batch = 0;
};

void process_batch_shared(EmbeddingStore& store, StripedLocks& locks,
                          std::span<const LabeledTriple> batch, const TrainConfig& cfg,
                          WorkerResult& result, std::size_t batch_no) {
  // Gather the touched rows into a compact local store.
  std::unordered_map<EntityIndex, EntityIndex> ent_local;
  std::unordered_map<RelationIndex, RelationIndex> rel_local;
  std::vector<EntityIndex> ent_global;
  std::vector<RelationIndex> rel_global;
  std::vector<LabeledTriple> local_batch;
  local_batch.reserve(batch.size());
  auto map_entity = [&](EntityIndex e) {
    auto [it, inserted] = ent_local.try_emplace(e, static_cast<EntityIndex>(ent_global.size()));
    if (inserted) ent_global.push_back(e);
    return it->second;
  };
  auto map_relation = [&](RelationIndex r) {
    auto [it, inserted] = rel_local.try_emplace(r, static_cast<RelationIndex>(rel_global.size()));
    if (inserted) rel_global.push_back(r);
    return it->second;
  };
  for (const auto& lt : batch) {
    local_batch.push_back({map_entity(lt.head), map_relation(lt.relation), map_entity(lt.tail),
                           lt.label});
  }
  EmbeddingStore local(store.model(), store.dim(), ent_global.size(), rel_global.size());
  for (std::size_t i = 0; i < ent_global.size(); ++i) {
    std::lock_guard lock(locks.entity(ent_global[i]));
    auto src = store.entity(ent_global[i]);
    std::copy(src.begin(), src.end(), local.entity(static_cast<EntityIndex>(i)).begin());
  }
  for (std::size_t i = 0; i < rel_global.size(); ++i) {
    std::lock_guard lock(locks.relation(rel_global[i]));
    auto src = store.relation(rel_global[i]);
    std::copy(src.begin(), src.end(), local.relation(static_cast<RelationIndex>(i)).begin());
  }

  auto lg = loss_and_grad(local, local_batch);
  if (!std::isfinite(lg.loss)) {
    result.diverged = true;
    result.diverged_batch = batch_no;
    return;
  }
  result.loss += lg.loss;
  result.labeled += batch.size();

  const auto& g = lg.grad;
  for (std::size_t s = 0; s < g.entities().size(); ++s) {
    const EntityIndex e = ent_global[g.entities()[s]];
    std::lock_guard lock(locks.entity(e));
    auto row = store.entity(e);
    auto grad = g.entity_row(s);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] -= cfg.lr * grad[i];
    if (is_transe(store.model())) normalize(row);
  }
  for (std::size_t s = 0; s < g.relations().size(); ++s) {
    const RelationIndex r = rel_global[g.relations()[s]];
    std::lock_guard lock(locks.relation(r));
    auto row = store.relation(r);
    auto grad = g.relation_row(s);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] -= cfg.lr * grad[i];
  }
}

EmbeddingStore train_parallel(EmbeddingStore store, std::span<const Triple> positives,
                              const TrainConfig& cfg, const TripleSet* known,
                              const ProgressSink& sink) {
  std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995ULL);
  std::vector<std::size_t> order(positives.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  StripedLocks locks(4096);
  const std::size_t n_entities = store.entity_count();
  const std::size_t n_batches = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const std::uint64_t epoch_seed = rng();
    std::vector<WorkerResult> results(cfg.threads);
    {
      std::vector<std::jthread> workers;
      for (std::size_t w = 0; w < cfg.threads; ++w) {
        workers.emplace_back([&, w] {
          std::mt19937_64 local_rng(epoch_seed + 0x9e3779b97f4a7c15ULL * (w + 1));
          std::vector<LabeledTriple> batch;
          for (std::size_t b = w; b < n_batches; b += cfg.threads) {
            const std::size_t begin = b * cfg.batch_size;
            const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            fill_batch(positives, order, begin, end, cfg, n_entities, known, local_rng, batch);
            process_batch_shared(store, locks, batch, cfg, results[w], b);
            if (results[w].diverged) return;
          }
        });
      }
    }
    double total = 0;
    std::size_t labeled = 0;
    for (const auto& r : results) {
      if (r.diverged) diverged(epoch, r.diverged_batch, cfg.lr);
      total += r.loss;
      labeled += r.labeled;
    }
    if (sink) sink(EpochStats{epoch, total / static_cast<double>(labeled), labeled});
  }
  return store;
}

}  // namespace

EmbeddingStore train(std::size_t entity_count, std::size_t relation_count,
                     std::span<const Triple> positives, const TrainConfig& cfg,
                     const ProgressSink& sink) {
  cfg.validate();
  if (positives.empty()) throw ValidationError("train: no training triples");
  auto store = init_store(cfg, entity_count, relation_count);
  if (cfg.epochs == 0) return store;
  if (entity_count < 2) throw ValidationError("train: need at least 2 entities");
  TripleSet known;
  if (cfg.filter_negatives) known = make_triple_set(positives);
  const TripleSet* known_ptr = cfg.filter_negatives ? &known : nullptr;
  if (cfg.threads <= 1) return train_sequential(std::move(store), positives, cfg, known_ptr, sink);
  return train_parallel(std::move(store), positives, cfg, known_ptr, sink);
}

}  // namespace kgr
