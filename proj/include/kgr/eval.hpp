#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgr/embed.hpp"
#include "kgr/graph.hpp"

namespace kgr {

/// Half-open time slices: train < train_cutoff <= valid < test_cutoff <= test.
struct TimeSplit {
  Date train_cutoff;
  Date test_cutoff;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  /// Entities that occur in valid/test but in no train triple.
  std::size_t cold_start = 0;
};

/// Throws ValidationError unless train_cutoff < test_cutoff and the train slice is non-empty.
TimeSplit time_split(const KnowledgeGraph& g, Date train_cutoff, Date test_cutoff);

enum class RankMode { Raw, Filtered };
std::string_view mode_name(RankMode m);
RankMode parse_mode(std::string_view name);

/// Which side of the triple is hidden and ranked against every entity.
enum class QuerySide { Head, Tail };

struct Query {
  TripleKey triple;
  QuerySide side = QuerySide::Tail;
};

/// 1 + #candidates scoring strictly higher + half the #other candidates tied
/// with the answer. Filtered mode skips candidates that form a `known` triple
/// other than the answer itself.
double rank_query(const EmbeddingStore& store, const Query& query, RankMode mode,
                  const TripleSet* known = nullptr);

struct RankingReport {
  std::string model;
  RankMode mode = RankMode::Raw;
  std::vector<double> ranks;
  double mr = 0;
  double mrr = 0;
  double hits1 = 0;
  double hits3 = 0;
  double hits10 = 0;
  std::size_t n_queries = 0;
  std::size_t n_cold_start = 0;
};

/// Throws ValidationError on an empty rank list.
RankingReport metrics(std::span<const double> ranks);

/// Head and tail queries for every test triple. `known` is required in
/// filtered mode and should cover train, valid and test.
RankingReport evaluate(const EmbeddingStore& store, std::span<const Triple> test,
                       RankMode mode, const TripleSet* known = nullptr, std::size_t threads = 1);

/// JSON object with exactly: model, mode, mr, mrr, hits1, hits3, hits10, n_queries, n_cold_start.
std::string report_json(const RankingReport& report);
RankingReport parse_report_json(std::string_view text);
void write_report_table(std::ostream& out, const RankingReport& report);

}  // namespace kgr
