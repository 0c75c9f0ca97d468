#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "kgr/graph.hpp"
#include "kgr/ingest.hpp"

namespace kgr {

/// Keeps predications where neither endpoint's semantic type is excluded.
std::vector<Predication> exclude_semtypes(std::span<const Predication> predications,
                                          const SemTypeRuleSet& rules);

/// 2x2 observed counts for a subject/object pair:
///
///            object   !object
///   subject   o11      o12
///  !subject   o21      o22
struct ContingencyTable {
  std::uint64_t o11 = 0;
  std::uint64_t o12 = 0;
  std::uint64_t o21 = 0;
  std::uint64_t o22 = 0;

  std::uint64_t n() const { return o11 + o12 + o21 + o22; }
};

/// Log-likelihood ratio G^2 = 2 * sum O ln(O/E), E = row * col / n, with
/// 0 ln 0 = 0. Exactly 0 when observed equals expected. Throws
/// ValidationError on an all-zero table.
double g2(const ContingencyTable& table);

/// Subject/object association table of a triple's endpoints, counted over
/// predication instances (each triple weighted by its support).
ContingencyTable pair_contingency(const KnowledgeGraph& g, EntityIndex subject,
                                  EntityIndex object);

struct TripleScore {
  double a_in = 0;   // in-degree of the tail
  double a_out = 0;  // out-degree of the head
  double g2 = 0;     // association of (head, tail)
  double a_in_norm = 0;
  double a_out_norm = 0;
  double g2_norm = 0;
  double fused = 0;
};

/// Min-max normalization to [0,1]. A constant (or single-element) vector maps to all zeros.
std::vector<double> min_max_normalize(std::span<const double> values);

/// One score per triple, index-aligned with `g.triples()`.
std::vector<TripleScore> score_triples(const KnowledgeGraph& g);

/// Indices (ascending) of the retained triples: every triple touching the
/// whitelist plus the best remaining ones by (fused desc, head, relation,
/// tail) until min(k, total) are kept. Throws when k cannot hold the
/// whitelisted triples.
std::vector<std::size_t> apply_cutoff(const KnowledgeGraph& g, std::span<const TripleScore> scores,
                                      const Whitelist& whitelist, std::size_t k);

/// Predications whose (subject, predicate, object) is one of `retained` triples of `g`.
std::vector<Predication> select_predications(std::span<const Predication> predications,
                                             const KnowledgeGraph& g,
                                             std::span<const std::size_t> retained);

struct ConfidenceOptions {
  double threshold = 0.5;
  /// Drop predications that have no score instead of keeping them.
  bool strict = false;
};

/// Drops predications scored below the threshold. The external table wins
/// over a confidence already carried by the record; surviving records carry
/// the score that was applied.
std::vector<Predication> apply_confidence(std::span<const Predication> predications,
                                          const ScoreTable& scores,
                                          const ConfidenceOptions& options = {});

/// `head_cui predicate tail_cui a_in a_out g2 a_in_norm a_out_norm g2_norm fused retained`
void write_triple_scores(std::ostream& out, const KnowledgeGraph& g,
                         std::span<const TripleScore> scores,
                         std::span<const std::size_t> retained);

struct TripleScoreRow {
  std::string head_cui;
  std::string predicate;
  std::string tail_cui;
  TripleScore score;
  bool retained = false;
};

std::vector<TripleScoreRow> read_triple_scores(std::istream& in);

}  // namespace kgr
