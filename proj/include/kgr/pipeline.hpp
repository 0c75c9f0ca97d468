#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgr/embed.hpp"
#include "kgr/eval.hpp"
#include "kgr/filter.hpp"
#include "kgr/graph.hpp"
#include "kgr/ingest.hpp"
#include "kgr/predict.hpp"

namespace kgr {

/// Everything a run needs. Loaded from JSON; relative paths in a config file
/// resolve against the file's directory.
struct RunConfig {
  std::string predications;
  std::string whitelist;
  std::string exclude_semtypes;
  std::string scores;
  std::map<std::string, std::string> candidates;  // category -> CUI list
  std::string output_dir = "out";

  bool strict_parse = false;

  std::optional<std::size_t> keep;
  double score_threshold = 0.5;
  bool strict_scores = false;

  TrainConfig train;

  Date train_cutoff = Date::from_days(17897);  // 2019-01-01
  Date test_cutoff = Date::from_days(18628);   // 2021-01-01

  RankMode mode = RankMode::Raw;

  std::size_t top_n = 10;
  bool novel_only = false;
  /// Overrides the per-category relation presets when non-empty.
  std::vector<std::string> relations;

  /// Checks that referenced input files exist and numeric fields are in range.
  void validate() const;
};

/// Keys (all optional): predications, whitelist, exclude_semtypes, scores,
/// candidates {category: path}, output_dir, strict_parse,
/// filter {keep, score_threshold, strict_scores},
/// train {model, dim, lr, epochs, negatives, batch_size, seed, init_scale, threads, filter_negatives},
/// split {train_cutoff, test_cutoff}, evaluate {mode},
/// predict {top_n, novel_only, relations}.
RunConfig parse_run_config(std::string_view json_text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

/// Receives (stage, message) progress lines.
using Logger = std::function<void(std::string_view, std::string_view)>;

struct IngestResult {
  PredicationFile parsed;
  KnowledgeGraph graph;
};

/// Parses the predication file and writes predications.tsv, graph.tsv and
/// entities.tsv into the output directory.
IngestResult run_ingest(const RunConfig& cfg, const Logger& log);

struct FilterResult {
  std::vector<Predication> predications;
  KnowledgeGraph graph;
  std::size_t scored_triples = 0;
  std::size_t retained_triples = 0;
};

/// Semantic-type exclusion, triple scoring, whitelist-aware cutoff and the
/// confidence threshold, in that order. Writes filtered_predications.tsv,
/// triple_scores.tsv, graph.tsv and entities.tsv.
FilterResult run_filter(const RunConfig& cfg, std::span<const Predication> input,
                        const Logger& log);

struct TrainResult {
  TimeSplit split;
  EmbeddingStore store;
  std::vector<EpochStats> epochs;
  std::string checkpoint_path;
};

/// Time-splits the graph and trains on the train slice. Writes train.tsv,
/// valid.tsv, test.tsv, checkpoint.tsv and train_log.tsv.
TrainResult run_train(const RunConfig& cfg, const KnowledgeGraph& g, const Logger& log);

/// Ranks head and tail queries of the test slice (falls back to valid when
/// test is empty). Writes report.json and report.txt.
RankingReport run_evaluate(const RunConfig& cfg, const KnowledgeGraph& g, const TimeSplit& split,
                           const EmbeddingStore& store, const Logger& log);

/// One prediction table per configured candidate category, written to
/// predictions_<category>.tsv.
std::map<std::string, PredictionResult> run_predict(const RunConfig& cfg,
                                                    const KnowledgeGraph& g,
                                                    const TripleSet& training,
                                                    const EmbeddingStore& store,
                                                    const std::string& checkpoint_digest,
                                                    const Logger& log);

struct PipelineResult {
  RankingReport report;
  std::map<std::string, PredictionResult> predictions;
  std::vector<std::string> artifacts;
};

PipelineResult run_pipeline(const RunConfig& cfg, const Logger& log);

}  // namespace kgr
