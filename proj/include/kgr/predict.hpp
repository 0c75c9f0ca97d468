#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kgr/embed.hpp"
#include "kgr/graph.hpp"
#include "kgr/ingest.hpp"

namespace kgr {

/// drug / chemical -> {TREATS, PREVENTS}; supplement -> {AFFECTS}.
std::vector<std::string> relation_presets(std::string_view category);

struct PredictionQuery {
  CandidateSet candidates;
  std::vector<std::string> relations;
  std::set<std::string> targets;
  std::size_t top_n = 10;
  bool novel_only = false;
};

/// One scored (candidate, relation, target) triple. `novel` is true when the
/// triple is absent from the training triples.
struct RankedCandidate {
  Entity head;
  std::string relation;
  Entity tail;
  double score = 0;
  bool novel = true;
};

struct PredictionResult {
  std::vector<RankedCandidate> rows;
  /// Candidate or target CUIs that are not in the graph (skipped).
  std::vector<std::string> unresolved;
  /// Number of triples scored.
  std::size_t enumerated = 0;
};

/// Scores every candidate x relation x target triple and keeps the top_n by
/// score (ties by head CUI, relation, tail CUI ascending). Throws when no
/// candidate or no target resolves, or when a relation is not in the graph.
PredictionResult enumerate_and_rank(const EmbeddingStore& store, const KnowledgeGraph& g,
                                    const TripleSet& training, const PredictionQuery& query);

struct PredictionTable {
  std::string model;
  std::string checkpoint;
  std::vector<RankedCandidate> rows;
};

/// `# model=<m> checkpoint=<digest>` then
/// `rank head_cui head_name predicate tail_cui tail_name score novel` rows.
void write_predictions(std::ostream& out, const PredictionTable& table);
PredictionTable read_predictions(std::istream& in);

}  // namespace kgr
