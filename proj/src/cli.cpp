#include "kgr/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "kgr/checkpoint.hpp"
#include "kgr/error.hpp"
#include "kgr/pipeline.hpp"
#include "kgr/synth.hpp"

namespace kgr {
namespace fs = std::filesystem;

namespace {

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::string quote(std::string_view s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') q += '\\';
    q += (c == '\n' || c == '\t') ? ' ' : c;
  }
  return q + '"';
}

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool quiet = false;

  std::optional<std::string> predications;
  std::optional<bool> strict_parse;

  std::optional<std::string> exclude_semtypes;
  std::optional<std::string> whitelist;
  std::optional<std::size_t> keep;
  std::optional<std::string> scores;
  std::optional<double> score_threshold;
  std::optional<bool> strict_scores;

  std::optional<std::string> model;
  std::optional<std::size_t> dim;
  std::optional<double> lr;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> negatives;
  std::optional<std::size_t> batch_size;
  std::optional<double> init_scale;
  std::optional<bool> filter_negatives;

  std::optional<std::string> train_cutoff;
  std::optional<std::string> test_cutoff;
  std::optional<std::string> mode;

  std::optional<std::size_t> top_n;
  std::optional<std::string> category;
  std::vector<std::string> relations;
  std::optional<bool> novel_only;

  std::optional<std::string> graph;
  std::optional<std::string> entities;
  std::optional<std::string> checkpoint;
  std::optional<std::string> candidates;

  std::size_t synth_size = 4000;
  bool benchmark = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--threads", f.threads, "Worker threads (1 = deterministic)");
  cmd->add_flag("--quiet", f.quiet, "Suppress info log lines");
}

void add_ingest(CLI::App* cmd, Flags& f) {
  cmd->add_option("--predications", f.predications, "Predication TSV");
  cmd->add_flag("--strict-parse", f.strict_parse, "Fail on the first malformed line");
}

void add_filter(CLI::App* cmd, Flags& f) {
  cmd->add_option("--exclude-semtypes", f.exclude_semtypes, "Semantic types to drop");
  cmd->add_option("--whitelist", f.whitelist, "Protected disease CUIs");
  cmd->add_option("--keep", f.keep, "Number of triples kept by the cutoff");
  cmd->add_option("--scores", f.scores, "Classifier score TSV");
  cmd->add_option("--score-threshold", f.score_threshold, "Minimum confidence");
  cmd->add_flag("--strict-scores", f.strict_scores, "Drop predications without a score");
}

void add_train(CLI::App* cmd, Flags& f) {
  cmd->add_option("--model", f.model, "TransE_L1, TransE_L2, DistMult or ComplEx");
  cmd->add_option("--dim", f.dim, "Embedding dimension");
  cmd->add_option("--lr", f.lr, "Learning rate");
  cmd->add_option("--epochs", f.epochs, "Training epochs");
  cmd->add_option("--negatives", f.negatives, "Negatives per positive");
  cmd->add_option("--batch-size", f.batch_size, "Positives per batch");
  cmd->add_option("--init-scale", f.init_scale, "Uniform init half-width");
  cmd->add_flag("--filter-negatives", f.filter_negatives, "Resample corruptions that are known triples");
}

void add_split(CLI::App* cmd, Flags& f) {
  cmd->add_option("--train-cutoff", f.train_cutoff, "First date outside train (YYYY-MM-DD)");
  cmd->add_option("--test-cutoff", f.test_cutoff, "First date of the test slice");
}

void add_graph_inputs(CLI::App* cmd, Flags& f) {
  cmd->add_option("--graph", f.graph, "Graph dump (default <out>/graph.tsv)");
  cmd->add_option("--entities", f.entities, "Entity table (default <out>/entities.tsv)");
}

void add_eval(CLI::App* cmd, Flags& f) {
  cmd->add_option("--mode", f.mode, "raw or filtered");
}

void add_predict(CLI::App* cmd, Flags& f) {
  cmd->add_option("--top-n", f.top_n, "Rows per category");
  cmd->add_option("--category", f.category, "drug, chemical or supplement");
  cmd->add_option("--relations", f.relations, "Override the category relations")->delimiter(',');
  cmd->add_flag("--novel-only", f.novel_only, "Drop triples already in train");
  cmd->add_option("--candidates", f.candidates, "Candidate CUI list for --category");
}

Date date_flag(const std::string& text, const char* flag) {
  auto d = Date::parse(text);
  if (!d) throw ValidationError(std::string(flag) + ": invalid date '" + text + "'");
  return *d;
}

RunConfig resolve_config(const Flags& f) {
  RunConfig c = f.config ? load_run_config(*f.config) : RunConfig{};
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  set(c.output_dir, f.out);
  set(c.train.seed, f.seed);
  set(c.train.threads, f.threads);
  set(c.predications, f.predications);
  set(c.strict_parse, f.strict_parse);
  set(c.exclude_semtypes, f.exclude_semtypes);
  set(c.whitelist, f.whitelist);
  if (f.keep) c.keep = *f.keep;
  set(c.scores, f.scores);
  set(c.score_threshold, f.score_threshold);
  set(c.strict_scores, f.strict_scores);
  if (f.model) c.train.model = parse_model(*f.model);
  set(c.train.dim, f.dim);
  set(c.train.lr, f.lr);
  set(c.train.epochs, f.epochs);
  set(c.train.negatives_per_positive, f.negatives);
  set(c.train.batch_size, f.batch_size);
  if (f.init_scale) c.train.init_scale = *f.init_scale;
  set(c.train.filter_negatives, f.filter_negatives);
  if (f.train_cutoff) c.train_cutoff = date_flag(*f.train_cutoff, "--train-cutoff");
  if (f.test_cutoff) c.test_cutoff = date_flag(*f.test_cutoff, "--test-cutoff");
  if (f.mode) c.mode = parse_mode(*f.mode);
  set(c.top_n, f.top_n);
  set(c.novel_only, f.novel_only);
  if (!f.relations.empty()) c.relations = f.relations;
  if (f.candidates) {
    if (!f.category) throw ValidationError("--candidates requires --category");
    c.candidates.clear();
    c.candidates[*f.category] = *f.candidates;
  } else if (f.category) {
    auto it = c.candidates.find(*f.category);
    if (it == c.candidates.end()) {
      throw ValidationError("no candidate list configured for category '" + *f.category + "'");
    }
    auto path = it->second;
    c.candidates.clear();
    c.candidates[*f.category] = path;
  }
  return c;
}

std::string in_out_dir(const RunConfig& c, const char* name) {
  return (fs::path(c.output_dir) / name).string();
}

KnowledgeGraph input_graph(const RunConfig& c, const Flags& f) {
  const auto graph = f.graph.value_or(in_out_dir(c, "graph.tsv"));
  if (!fs::is_regular_file(graph)) throw ValidationError("graph file not found: " + graph);
  std::string entities;
  if (f.entities) {
    entities = *f.entities;
    if (!fs::is_regular_file(entities)) throw ValidationError("entity file not found: " + entities);
  } else if (!f.graph && fs::is_regular_file(in_out_dir(c, "entities.tsv"))) {
    entities = in_out_dir(c, "entities.tsv");
  }
  return load_graph(graph, entities);
}

EmbeddingStore input_store(const RunConfig& c, const Flags& f, const KnowledgeGraph& g,
                           std::string* digest) {
  const auto path = f.checkpoint.value_or(in_out_dir(c, "checkpoint.tsv"));
  if (!fs::is_regular_file(path)) throw ValidationError("checkpoint not found: " + path);
  if (digest) *digest = file_digest(path);
  return align_to_graph(load_checkpoint(path), g);
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-graph construction, embedding and candidate ranking", "kgr"};
  app.require_subcommand(1, 1);
  Flags f;

  auto* ingest = app.add_subcommand("ingest", "Parse predications and build the graph");
  add_common(ingest, f);
  add_ingest(ingest, f);

  auto* filter = app.add_subcommand("filter", "Semantic-type, centrality/G2 and confidence filters");
  add_common(filter, f);
  add_ingest(filter, f);
  add_filter(filter, f);

  auto* train_cmd = app.add_subcommand("train", "Time-split the graph and train embeddings");
  add_common(train_cmd, f);
  add_graph_inputs(train_cmd, f);
  add_train(train_cmd, f);
  add_split(train_cmd, f);

  auto* eval_cmd = app.add_subcommand("evaluate", "Rank held-out triples");
  add_common(eval_cmd, f);
  add_graph_inputs(eval_cmd, f);
  add_split(eval_cmd, f);
  add_eval(eval_cmd, f);
  eval_cmd->add_option("--checkpoint", f.checkpoint, "Embeddings (default <out>/checkpoint.tsv)");

  auto* predict_cmd = app.add_subcommand("predict", "Rank candidate-disease triples");
  add_common(predict_cmd, f);
  add_graph_inputs(predict_cmd, f);
  add_split(predict_cmd, f);
  add_predict(predict_cmd, f);
  predict_cmd->add_option("--whitelist", f.whitelist, "Target disease CUIs");
  predict_cmd->add_option("--checkpoint", f.checkpoint, "Embeddings (default <out>/checkpoint.tsv)");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  add_common(pipeline, f);
  add_ingest(pipeline, f);
  add_filter(pipeline, f);
  add_train(pipeline, f);
  add_split(pipeline, f);
  add_eval(pipeline, f);
  add_predict(pipeline, f);

  auto* synth = app.add_subcommand("synth", "Write a synthetic demo corpus");
  synth->add_option("--out", f.out, "Output directory")->required();
  synth->add_option("--seed", f.seed, "Random seed");
  synth->add_option("--size", f.synth_size, "Approximate number of predications");
  synth->add_flag("--benchmark", f.benchmark, "Write the link-prediction benchmark instead");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    err << "error: " << one_line(e.what()) << '\n';
    return 2;
  }

  const bool quiet = f.quiet;
  Logger log = [&err, quiet](std::string_view stage, std::string_view msg) {
    if (quiet) return;
    err << "level=info stage=" << stage << " msg=" << quote(msg) << '\n';
  };

  try {
    if (synth->parsed()) {
      const auto seed = f.seed.value_or(42);
      if (f.benchmark) {
        auto b = synth::make_benchmark(seed, std::min<std::size_t>(f.synth_size, 3000));
        fs::create_directories(*f.out);
        std::ofstream file(fs::path(*f.out) / "predications.tsv", std::ios::binary);
        if (!file) throw ValidationError("cannot write " + *f.out + "/predications.tsv");
        write_predications(file, b.predications);
      } else {
        synth::write_demo_corpus(synth::make_demo_corpus(seed, f.synth_size), *f.out);
      }
      log("synth", "wrote corpus to " + *f.out);
      return 0;
    }

    const auto cfg = resolve_config(f);
    if (ingest->parsed()) {
      run_ingest(cfg, log);
    } else if (filter->parsed()) {
      std::vector<Predication> input;
      if (f.predications || !fs::is_regular_file(in_out_dir(cfg, "predications.tsv"))) {
        input = run_ingest(cfg, log).parsed.records;
      } else {
        input = parse_predications(in_out_dir(cfg, "predications.tsv"), ParseMode::Strict).records;
      }
      run_filter(cfg, input, log);
    } else if (train_cmd->parsed()) {
      cfg.train.validate();
      const auto g = input_graph(cfg, f);
      run_train(cfg, g, log);
    } else if (eval_cmd->parsed()) {
      const auto g = input_graph(cfg, f);
      const auto store = input_store(cfg, f, g, nullptr);
      const auto split = time_split(g, cfg.train_cutoff, cfg.test_cutoff);
      run_evaluate(cfg, g, split, store, log);
    } else if (predict_cmd->parsed()) {
      if (cfg.candidates.empty()) {
        throw ValidationError("predict: give --category and --candidates, or configure candidates");
      }
      const auto g = input_graph(cfg, f);
      std::string digest;
      const auto store = input_store(cfg, f, g, &digest);
      const auto split = time_split(g, cfg.train_cutoff, cfg.test_cutoff);
      run_predict(cfg, g, make_triple_set(split.train), store, digest, log);
    } else if (pipeline->parsed()) {
      run_pipeline(cfg, log);
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
}

int run_subcommand(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run_subcommand(args, std::cout, std::cerr);
}

}  // namespace kgr
