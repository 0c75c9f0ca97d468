#include "kgr/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kgr/checkpoint.hpp"
#include "kgr/error.hpp"
#include "kgr/tsv.hpp"

namespace kgr {
namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_absolute()) return p;
  return (fs::path(base) / path).lexically_normal().string();
}

Date parse_date_or_throw(const std::string& text, std::string_view what) {
  auto d = Date::parse(text);
  if (!d) throw ValidationError(std::string(what) + ": invalid date '" + text + "'");
  return *d;
}

void require_file(const std::string& path, std::string_view what) {
  if (path.empty()) return;
  if (!fs::is_regular_file(path)) {
    throw ValidationError(std::string(what) + " not found: " + path);
  }
}

std::ofstream open_artifact(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  const auto path = (fs::path(cfg.output_dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

std::string artifact_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

void emit(const Logger& log, std::string_view stage, const std::string& msg) {
  if (log) log(stage, msg);
}

}  // namespace

void RunConfig::validate() const {
  require_file(predications, "predication file");
  require_file(whitelist, "whitelist");
  require_file(exclude_semtypes, "semantic-type rule file");
  require_file(scores, "score file");
  for (const auto& [category, path] : candidates) {
    if (relations.empty()) relation_presets(category);
    require_file(path, "candidate file");
  }
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    throw ValidationError("score threshold must lie in [0,1]");
  }
  if (!(train_cutoff < test_cutoff)) {
    throw ValidationError("train cutoff must precede test cutoff");
  }
  if (top_n == 0) throw ValidationError("top_n must be positive");
  train.validate();
}

RunConfig parse_run_config(std::string_view json_text, const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  RunConfig c;
  try {
    auto path = [&](const nlohmann::json& obj, const char* key, std::string& out) {
      if (obj.contains(key)) out = resolve(base_dir, obj.at(key).get<std::string>());
    };
    path(j, "predications", c.predications);
    path(j, "whitelist", c.whitelist);
    path(j, "exclude_semtypes", c.exclude_semtypes);
    path(j, "scores", c.scores);
    path(j, "output_dir", c.output_dir);
    if (j.contains("candidates")) {
      for (const auto& [cat, p] : j.at("candidates").items()) {
        c.candidates[cat] = resolve(base_dir, p.get<std::string>());
      }
    }
    if (j.contains("strict_parse")) c.strict_parse = j.at("strict_parse").get<bool>();
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      if (f.contains("keep") && !f.at("keep").is_null()) c.keep = f.at("keep").get<std::size_t>();
      if (f.contains("score_threshold")) c.score_threshold = f.at("score_threshold").get<double>();
      if (f.contains("strict_scores")) c.strict_scores = f.at("strict_scores").get<bool>();
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      auto& tc = c.train;
      if (t.contains("model")) tc.model = parse_model(t.at("model").get<std::string>());
      if (t.contains("dim")) tc.dim = t.at("dim").get<std::size_t>();
      if (t.contains("lr")) tc.lr = t.at("lr").get<double>();
      if (t.contains("epochs")) tc.epochs = t.at("epochs").get<std::size_t>();
      if (t.contains("negatives")) tc.negatives_per_positive = t.at("negatives").get<std::size_t>();
      if (t.contains("batch_size")) tc.batch_size = t.at("batch_size").get<std::size_t>();
      if (t.contains("seed")) tc.seed = t.at("seed").get<std::uint64_t>();
      if (t.contains("init_scale")) tc.init_scale = t.at("init_scale").get<double>();
      if (t.contains("threads")) tc.threads = t.at("threads").get<std::size_t>();
      if (t.contains("filter_negatives")) tc.filter_negatives = t.at("filter_negatives").get<bool>();
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      if (s.contains("train_cutoff")) {
        c.train_cutoff = parse_date_or_throw(s.at("train_cutoff").get<std::string>(), "config");
      }
      if (s.contains("test_cutoff")) {
        c.test_cutoff = parse_date_or_throw(s.at("test_cutoff").get<std::string>(), "config");
      }
    }
    if (j.contains("evaluate") && j.at("evaluate").contains("mode")) {
      c.mode = parse_mode(j.at("evaluate").at("mode").get<std::string>());
    }
    if (j.contains("predict")) {
      const auto& p = j.at("predict");
      if (p.contains("top_n")) c.top_n = p.at("top_n").get<std::size_t>();
      if (p.contains("novel_only")) c.novel_only = p.at("novel_only").get<bool>();
      if (p.contains("relations")) c.relations = p.at("relations").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config file not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto base = fs::path(path).parent_path().string();
  return parse_run_config(ss.str(), base.empty() ? "." : base);
}

IngestResult run_ingest(const RunConfig& cfg, const Logger& log) {
  if (cfg.predications.empty()) throw ValidationError("ingest: no predication file given");
  require_file(cfg.predications, "predication file");
  IngestResult r;
  r.parsed = parse_predications(cfg.predications,
                                cfg.strict_parse ? ParseMode::Strict : ParseMode::Lenient);
  for (const auto& d : r.parsed.diagnostics) emit(log, "ingest", "skipped " + d);
  r.graph = KnowledgeGraph::build(r.parsed.records);
  {
    auto out = open_artifact(cfg, "predications.tsv");
    write_predications(out, r.parsed.records);
  }
  {
    auto out = open_artifact(cfg, "graph.tsv");
    write_graph_tsv(out, r.graph);
  }
  {
    auto out = open_artifact(cfg, "entities.tsv");
    write_entities_tsv(out, r.graph);
  }
  emit(log, "ingest",
       std::to_string(r.parsed.records.size()) + " predications, " +
           std::to_string(r.parsed.skipped) + " skipped, " +
           std::to_string(r.graph.triple_count()) + " distinct triples, " +
           std::to_string(r.graph.entity_count()) + " entities");
  return r;
}

FilterResult run_filter(const RunConfig& cfg, std::span<const Predication> input,
                        const Logger& log) {
  SemTypeRuleSet rules;
  if (!cfg.exclude_semtypes.empty()) rules = parse_semtypes(cfg.exclude_semtypes);
  auto kept = exclude_semtypes(input, rules);
  emit(log, "filter",
       "semantic-type exclusion kept " + std::to_string(kept.size()) + " of " +
           std::to_string(input.size()) + " predications");

  const auto scored_graph = KnowledgeGraph::build(kept);
  const auto scores = score_triples(scored_graph);
  Whitelist whitelist;
  if (!cfg.whitelist.empty()) whitelist = parse_whitelist(cfg.whitelist, true);
  const std::size_t k = cfg.keep.value_or(scored_graph.triple_count());
  const auto retained = apply_cutoff(scored_graph, scores, whitelist, k);
  emit(log, "filter",
       "cutoff kept " + std::to_string(retained.size()) + " of " +
           std::to_string(scored_graph.triple_count()) + " triples");
  {
    auto out = open_artifact(cfg, "triple_scores.tsv");
    write_triple_scores(out, scored_graph, scores, retained);
  }
  auto selected = select_predications(kept, scored_graph, retained);

  if (cfg.strict_scores && cfg.scores.empty()) {
    throw ValidationError("filter: strict scores requested but no score file given");
  }
  ScoreTable table;
  if (!cfg.scores.empty()) {
    table = parse_scores(cfg.scores);
    if (table.duplicate_warnings) {
      emit(log, "filter",
           "warning: " + std::to_string(table.duplicate_warnings) + " duplicate score keys");
    }
  }
  FilterResult r;
  r.predications =
      apply_confidence(selected, table, ConfidenceOptions{cfg.score_threshold, cfg.strict_scores});
  emit(log, "filter",
       "confidence threshold kept " + std::to_string(r.predications.size()) + " of " +
           std::to_string(selected.size()) + " predications");
  r.graph = KnowledgeGraph::build(r.predications);
  r.scored_triples = scored_graph.triple_count();
  r.retained_triples = retained.size();
  {
    auto out = open_artifact(cfg, "filtered_predications.tsv");
    write_predications(out, r.predications);
  }
  {
    auto out = open_artifact(cfg, "graph.tsv");
    write_graph_tsv(out, r.graph);
  }
  {
    auto out = open_artifact(cfg, "entities.tsv");
    write_entities_tsv(out, r.graph);
  }
  emit(log, "filter",
       "graph has " + std::to_string(r.graph.triple_count()) + " triples over " +
           std::to_string(r.graph.entity_count()) + " entities");
  return r;
}

TrainResult run_train(const RunConfig& cfg, const KnowledgeGraph& g, const Logger& log) {
  TrainResult r;
  r.split = time_split(g, cfg.train_cutoff, cfg.test_cutoff);
  emit(log, "train",
       "split " + std::to_string(r.split.train.size()) + "/" +
           std::to_string(r.split.valid.size()) + "/" + std::to_string(r.split.test.size()) +
           " train/valid/test, " + std::to_string(r.split.cold_start) + " cold-start entities");
  for (auto [name, slice] : {std::pair{"train.tsv", &r.split.train},
                             std::pair{"valid.tsv", &r.split.valid},
                             std::pair{"test.tsv", &r.split.test}}) {
    auto out = open_artifact(cfg, name);
    write_graph_tsv(out, g, *slice);
  }
  r.store = train(g.entity_count(), g.relation_count(), r.split.train, cfg.train,
                  [&](const EpochStats& s) {
                    r.epochs.push_back(s);
                    if (s.epoch % 10 != 0 && s.epoch != 1 && s.epoch != cfg.train.epochs) return;
                    emit(log, "train",
                         "epoch " + std::to_string(s.epoch) + " mean_loss " +
                             tsv::format_double(s.mean_loss));
                  });
  r.checkpoint_path = artifact_path(cfg, "checkpoint.tsv");
  save_checkpoint(r.checkpoint_path, make_checkpoint(r.store, g));
  {
    auto out = open_artifact(cfg, "train_log.tsv");
    out << "epoch\tmean_loss\tlabeled\n";
    for (const auto& s : r.epochs) {
      out << s.epoch << '\t' << tsv::format_double(s.mean_loss) << '\t' << s.labeled << '\n';
    }
  }
  return r;
}

RankingReport run_evaluate(const RunConfig& cfg, const KnowledgeGraph& g, const TimeSplit& split,
                           const EmbeddingStore& store, const Logger& log) {
  const auto& queries = split.test.empty() ? split.valid : split.test;
  if (queries.empty()) throw ValidationError("evaluate: no valid or test triples to rank");
  if (split.test.empty()) emit(log, "evaluate", "test slice empty, ranking the valid slice");
  const auto known = make_triple_set(g.triples());
  auto report = evaluate(store, queries, cfg.mode, &known, cfg.train.threads);
  report.n_cold_start = split.cold_start;
  {
    auto out = open_artifact(cfg, "report.json");
    out << report_json(report);
  }
  {
    auto out = open_artifact(cfg, "report.txt");
    write_report_table(out, report);
  }
  std::ostringstream table;
  write_report_table(table, report);
  std::istringstream lines(table.str());
  for (std::string line; std::getline(lines, line);) emit(log, "evaluate", line);
  return report;
}

std::map<std::string, PredictionResult> run_predict(const RunConfig& cfg,
                                                    const KnowledgeGraph& g,
                                                    const TripleSet& training,
                                                    const EmbeddingStore& store,
                                                    const std::string& checkpoint_digest,
                                                    const Logger& log) {
  if (cfg.whitelist.empty()) throw ValidationError("predict: a target whitelist is required");
  const auto targets = parse_whitelist(cfg.whitelist, true);
  std::map<std::string, PredictionResult> out;
  for (const auto& [category, path] : cfg.candidates) {
    PredictionQuery q;
    q.candidates = parse_candidates(path, category);
    q.relations = cfg.relations.empty() ? relation_presets(category) : cfg.relations;
    q.targets = targets.protected_cuis;
    q.top_n = cfg.top_n;
    q.novel_only = cfg.novel_only;
    auto result = enumerate_and_rank(store, g, training, q);
    if (!result.unresolved.empty()) {
      emit(log, "predict",
           category + ": " + std::to_string(result.unresolved.size()) +
               " CUIs not in the graph were skipped");
    }
    {
      auto file = open_artifact(cfg, "predictions_" + category + ".tsv");
      write_predictions(file, PredictionTable{std::string(model_name(store.model())),
                                              checkpoint_digest, result.rows});
    }
    emit(log, "predict",
         category + ": scored " + std::to_string(result.enumerated) + " triples, wrote top " +
             std::to_string(result.rows.size()));
    out.emplace(category, std::move(result));
  }
  return out;
}

PipelineResult run_pipeline(const RunConfig& cfg, const Logger& log) {
  cfg.validate();
  PipelineResult result;
  auto ingested = run_ingest(cfg, log);
  // The filter stage rewrites graph.tsv/entities.tsv with the filtered graph.
  auto filtered = run_filter(cfg, ingested.parsed.records, log);
  auto trained = run_train(cfg, filtered.graph, log);
  result.report = run_evaluate(cfg, filtered.graph, trained.split, trained.store, log);
  if (!cfg.candidates.empty()) {
    const auto training = make_triple_set(trained.split.train);
    result.predictions = run_predict(cfg, filtered.graph, training, trained.store,
                                     file_digest(trained.checkpoint_path), log);
  }
  for (const char* name : {"predications.tsv", "filtered_predications.tsv", "triple_scores.tsv",
                           "graph.tsv", "entities.tsv", "train.tsv", "valid.tsv", "test.tsv",
                           "checkpoint.tsv", "train_log.tsv", "report.json", "report.txt"}) {
    result.artifacts.push_back(artifact_path(cfg, name));
  }
  for (const auto& [category, _] : result.predictions) {
    result.artifacts.push_back(artifact_path(cfg, "predictions_" + category + ".tsv"));
  }
  return result;
}

}  // namespace kgr
