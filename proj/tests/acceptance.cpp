// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Thresholds and tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "kgr/checkpoint.hpp"
#include "kgr/eval.hpp"
#include "kgr/filter.hpp"
#include "kgr/pipeline.hpp"
#include "kgr/synth.hpp"
#include "oracles.hpp"

using namespace kgr;
namespace fs = std::filesystem;

namespace {

constexpr double kGradRel = 1e-4;
constexpr double kGradAbs = 1e-6;
constexpr double kGradSeconds = 10;
constexpr double kIdentityTol = 1e-12;
constexpr double kG2Rel = 1e-9;
constexpr double kG2Seconds = 1;
constexpr double kMetricsTol = 1e-9;
constexpr double kHits10Min = 0.70;
constexpr double kMrrFactor = 3.0;
constexpr double kBenchSeconds = 120;
constexpr double kPipelineSeconds = 180;
constexpr double kParallelMrrGap = 0.05;

int failures = 0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s  %-32s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

void check(const char* name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    report(name, ok, detail);
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct BenchData {
  KnowledgeGraph graph;
  TimeSplit split;
  TripleSet known;
};

const BenchData& bench() {
  static const BenchData data = [] {
    const auto b = synth::make_benchmark(2024);
    BenchData d;
    d.graph = KnowledgeGraph::build(b.predications);
    d.split = time_split(d.graph, b.train_cutoff, b.test_cutoff);
    d.known = make_triple_set(d.graph.triples());
    return d;
  }();
  return data;
}

TrainConfig bench_config(Model m) {
  TrainConfig c;
  c.model = m;
  c.dim = 50;
  c.lr = 0.01;
  c.epochs = 200;
  c.seed = 42;
  c.threads = 1;
  // One corruption per positive, as in the original TransE protocol. With the
  // summed logistic loss and unit-norm entities, the L2 logit lies in
  // [-(2 + |r|), 0]; at 16 negatives per positive their push outweighs the
  // positive pull and the clusters spread out.
  c.negatives_per_positive = 1;
  return c;
}

RankingReport bench_eval(const EmbeddingStore& s) {
  return evaluate(s, bench().split.test, RankMode::Filtered, &bench().known);
}

RankingReport random_baseline(Model m) {
  const auto& d = bench();
  return bench_eval(init_store(bench_config(m), d.graph.entity_count(), d.graph.relation_count()));
}

EmbeddingStore bench_train(const TrainConfig& c) {
  const auto& d = bench();
  return train(d.graph.entity_count(), d.graph.relation_count(), d.split.train, c);
}

}  // namespace

int main() {
  check("gradient-correctness", [] {
    const auto t0 = Clock::now();
    std::size_t checked = 0, bad = 0;
    double worst = 0;
    for (auto m : {Model::TransE_L1, Model::TransE_L2, Model::DistMult, Model::ComplEx}) {
      const auto r = oracle::gradient_check(m, 4, 100, 1000 + static_cast<int>(m), kGradRel, kGradAbs);
      checked += r.checked;
      bad += r.failures;
      worst = std::max(worst, r.worst);
    }
    const double secs = seconds_since(t0);
    return std::pair{bad == 0 && secs < kGradSeconds,
                     fmt("%zu partials, %zu outside tolerance, worst %.3g of allowed, %.2fs", checked,
                         bad, worst, secs)};
  });

  check("scoring-identities", [] {
    using V = std::vector<double>;
    const double a = score_vectors(Model::TransE_L2, V{1, 0}, V{0, 1}, V{1, 1});
    const double b = score_vectors(Model::TransE_L2, V{0, 0}, V{3, 4}, V{0, 0});
    const double c = score_vectors(Model::DistMult, V{1, 2}, V{3, 4}, V{5, 6});
    const double d = score_vectors(Model::ComplEx, V{1, 0}, V{0, 1}, V{0, 1});
    const double e = softplus(-1.0 * 0.0);
    const bool ok = a == 0.0 && b == -5.0 && c == 63.0 && d == 1.0 &&
                    std::abs(e - std::log(2.0)) <= kIdentityTol;
    return std::pair{ok, fmt("%g %g %g %g %.15f", a, b, c, d, e)};
  });

  check("g2-oracle", [] {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(77);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const std::uint64_t cap = i % 3 == 0 ? 20 : (i % 3 == 1 ? 10'000 : 100'000'000);
      ContingencyTable t{rng() % cap, rng() % cap, rng() % cap, 1 + rng() % cap};
      const double ref = oracle::g2(t);
      const double v = g2(t);
      const double err = ref > 0 ? std::abs(v - ref) / ref : std::abs(v);
      worst = std::max(worst, err);
    }
    bool zeros = true;
    for (std::uint64_t k = 1; k <= 50; ++k) {
      zeros &= g2({k, 2 * k, 3 * k, 6 * k}) == 0.0;
      zeros &= g2({k, k, k, k}) == 0.0;
    }
    const double secs = seconds_since(t0);
    return std::pair{worst <= kG2Rel && zeros && secs < kG2Seconds,
                     fmt("max rel err %.3g, independence tables exactly 0: %s, %.3fs", worst,
                         zeros ? "yes" : "no", secs)};
  });

  check("ranking-oracle", [] {
    constexpr std::size_t ne = 30, nr = 3;
    EmbeddingStore s(Model::TransE_L2, 5, ne, nr);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (auto& x : s.entity_data()) x = u(rng);
    for (auto& x : s.relation_data()) x = u(rng);
    // Duplicate a few rows so ties occur.
    for (EntityIndex e = 25; e < ne; ++e) {
      std::copy(s.entity(e - 20).begin(), s.entity(e - 20).end(), s.entity(e).begin());
    }
    TripleSet known;
    for (int i = 0; i < 400; ++i) {
      known.insert({static_cast<EntityIndex>(rng() % ne), static_cast<RelationIndex>(rng() % nr),
                    static_cast<EntityIndex>(rng() % ne)});
    }
    std::size_t queries = 0, mismatches = 0;
    for (EntityIndex h = 0; h < ne; ++h) {
      for (RelationIndex r = 0; r < nr; ++r) {
        for (EntityIndex t = 0; t < ne; ++t) {
          for (auto side : {QuerySide::Head, QuerySide::Tail}) {
            const Query q{{h, r, t}, side};
            mismatches += rank_query(s, q, RankMode::Raw) !=
                          oracle::sorted_rank(s, q, [](auto, auto) { return false; });
            mismatches += rank_query(s, q, RankMode::Filtered, &known) !=
                          oracle::sorted_rank(s, q, [&](EntityIndex a, EntityIndex b) {
                            return known.count({a, r, b}) > 0;
                          });
            queries += 2;
          }
        }
      }
    }
    const auto m = metrics(std::vector<double>{1, 2, 4});
    const bool metrics_ok = std::abs(m.mr - 2.3333333333333333) <= kMetricsTol &&
                            std::abs(m.mrr - 0.5833333333333333) <= kMetricsTol &&
                            std::abs(m.hits1 - 1.0 / 3.0) <= kMetricsTol &&
                            std::abs(m.hits3 - 2.0 / 3.0) <= kMetricsTol &&
                            std::abs(m.hits10 - 1.0) <= kMetricsTol;
    return std::pair{mismatches == 0 && metrics_ok,
                     fmt("%zu rankings, %zu mismatches; metrics([1,2,4]) = (%.4f, %.4f, %.4f, %.4f, %.4f)",
                         queries, mismatches, m.mr, m.mrr, m.hits1, m.hits3, m.hits10)};
  });

  double deterministic_mrr = 0;
  check("synthetic-benchmark", [&] {
    const auto& d = bench();
    const auto t0 = Clock::now();
    const auto transe = bench_eval(bench_train(bench_config(Model::TransE_L2)));
    const double secs = seconds_since(t0);
    deterministic_mrr = transe.mrr;
    const auto base = random_baseline(Model::TransE_L2);
    const bool ok = transe.hits10 >= kHits10Min && transe.mrr >= kMrrFactor * base.mrr &&
                    secs < kBenchSeconds;
    return std::pair{ok, fmt("%zu entities, %zu train / %zu test triples; TransE Hits@10 %.3f, "
                             "MRR %.4f vs random %.4f (%.1fx), 1 negative/positive, %.1fs",
                             d.graph.entity_count(), d.split.train.size(), d.split.test.size(),
                             transe.hits10, transe.mrr, base.mrr, transe.mrr / base.mrr, secs)};
  });

  check("benchmark-bilinear-models", [] {
    std::string detail;
    bool ok = true;
    for (auto m : {Model::DistMult, Model::ComplEx}) {
      const auto r = bench_eval(bench_train(bench_config(m)));
      const auto base = random_baseline(m);
      ok &= r.mrr > base.mrr;
      detail += fmt("%s MRR %.4f vs random %.4f; ", std::string(model_name(m)).c_str(), r.mrr,
                    base.mrr);
    }
    return std::pair{ok, detail};
  });

  check("filter-determinism-whitelist", [] {
    const auto corpus = synth::make_demo_corpus(31, 500);
    const auto root = fs::temp_directory_path() / "kgr_acceptance_filter";
    fs::remove_all(root);
    synth::write_demo_corpus(corpus, root.string());

    RunConfig cfg;
    cfg.whitelist = KGR_DATA_DIR "/ad_whitelist.txt";
    cfg.exclude_semtypes = KGR_DATA_DIR "/excluded_semtypes.txt";
    cfg.scores = (root / "scores.tsv").string();

    const auto wl = parse_whitelist(cfg.whitelist);
    const auto g = KnowledgeGraph::build(
        exclude_semtypes(corpus.predications, parse_semtypes(cfg.exclude_semtypes)));
    const auto scores = score_triples(g);
    std::vector<std::size_t> protected_idx;
    for (std::size_t i = 0; i < g.triple_count(); ++i) {
      const auto& t = g.triples()[i];
      if (wl.contains(g.entity(t.head).cui) || wl.contains(g.entity(t.tail).cui)) {
        protected_idx.push_back(i);
      }
    }
    bool all_kept = true;
    for (std::size_t k = protected_idx.size(); k <= g.triple_count() + 5; ++k) {
      const auto kept = apply_cutoff(g, scores, wl, k);
      all_kept &= kept.size() == std::min(k, g.triple_count());
      all_kept &= std::includes(kept.begin(), kept.end(), protected_idx.begin(), protected_idx.end());
    }

    cfg.keep = (protected_idx.size() + g.triple_count()) / 2;
    std::vector<std::string> dumps;
    for (const char* run : {"a", "b"}) {
      cfg.output_dir = (root / run).string();
      run_filter(cfg, corpus.predications, {});
      std::string all;
      for (const char* f : {"filtered_predications.tsv", "triple_scores.tsv", "graph.tsv",
                            "entities.tsv"}) {
        all += slurp(root / run / f);
      }
      dumps.push_back(all);
    }
    const bool same = dumps[0] == dumps[1] && !dumps[0].empty();
    return std::pair{all_kept && same && !protected_idx.empty(),
                     fmt("%zu predications, %zu triples, %zu protected kept at every k; "
                         "repeat runs byte-identical: %s",
                         corpus.predications.size(), g.triple_count(), protected_idx.size(),
                         same ? "yes" : "no")};
  });

  check("time-split-partition", [] {
    const Date lo = *Date::parse("2019-01-01");
    const Date hi = *Date::parse("2021-01-01");
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> day(lo.days_since_epoch() - 800, hi.days_since_epoch() + 800);
    GraphBuilder b;
    const Date boundary[] = {Date::from_days(lo.days_since_epoch() - 1), lo,
                             Date::from_days(hi.days_since_epoch() - 1), hi};
    for (int i = 0; i < 10000; ++i) {
      const Date d = i < 400 ? boundary[i % 4] : Date::from_days(day(rng));
      b.add_triple(Entity{"C" + std::to_string(i), "", ""}, "r",
                   Entity{"D" + std::to_string(i), "", ""}, d);
    }
    const auto g = std::move(b).finish();
    const auto s = time_split(g, lo, hi);
    std::size_t wrong = 0;
    for (const auto& t : s.train) wrong += !(t.earliest_date < lo);
    for (const auto& t : s.valid) wrong += !(lo <= t.earliest_date && t.earliest_date < hi);
    for (const auto& t : s.test) wrong += !(hi <= t.earliest_date);
    const std::size_t total = s.train.size() + s.valid.size() + s.test.size();
    // The 400 boundary triples: 100 on each side of each cutoff.
    std::size_t on_lo = 0, on_hi = 0;
    for (const auto& t : s.valid) on_lo += t.earliest_date == lo;
    for (const auto& t : s.test) on_hi += t.earliest_date == hi;
    const bool ok = wrong == 0 && total == 10000 && on_lo >= 100 && on_hi >= 100;
    return std::pair{ok, fmt("%zu/%zu/%zu train/valid/test, %zu misplaced, cutoff dates in the "
                             "later slice: %s",
                             s.train.size(), s.valid.size(), s.test.size(), wrong,
                             on_lo >= 100 && on_hi >= 100 ? "yes" : "no")};
  });

  check("end-to-end-pipeline", [] {
    auto cfg = load_run_config(KGR_DATA_DIR "/demo/demo.json");
    cfg.output_dir = (fs::temp_directory_path() / "kgr_acceptance_pipeline").string();
    fs::remove_all(cfg.output_dir);
    const auto t0 = Clock::now();
    const auto result = run_pipeline(cfg, {});
    const double secs = seconds_since(t0);
    const fs::path out = cfg.output_dir;

    std::size_t parsed = 0;
    auto open = [&](const char* name) {
      ++parsed;
      return std::ifstream(out / name, std::ios::binary);
    };
    {
      auto in = open("predications.tsv");
      read_predications(in, ParseMode::Strict);
    }
    {
      auto in = open("filtered_predications.tsv");
      read_predications(in, ParseMode::Strict);
    }
    {
      auto in = open("triple_scores.tsv");
      read_triple_scores(in);
    }
    auto ein = open("entities.tsv");
    const auto names = read_entities_tsv(ein);
    KnowledgeGraph g;
    {
      auto in = open("graph.tsv");
      g = read_graph_tsv(in, &names);
    }
    for (const char* f : {"train.tsv", "valid.tsv", "test.tsv"}) {
      auto in = open(f);
      read_graph_tsv(in);
    }
    const auto store = align_to_graph(load_checkpoint((out / "checkpoint.tsv").string()), g);
    ++parsed;
    const auto rep = parse_report_json(slurp(out / "report.json"));
    ++parsed;
    std::size_t prediction_rows = 0;
    for (const auto& [category, _] : cfg.candidates) {
      std::ifstream in(out / ("predictions_" + category + ".tsv"));
      const auto table = read_predictions(in);
      prediction_rows += table.rows.size();
      ++parsed;
    }
    const bool ok = secs < kPipelineSeconds && store.all_finite() && rep.n_queries > 0 &&
                    prediction_rows > 0 && result.artifacts.size() >= 12;
    return std::pair{ok, fmt("%zu artifacts re-parsed, %zu triples, report MRR %.4f, "
                             "%zu prediction rows, %.1fs",
                             parsed, g.triple_count(), rep.mrr, prediction_rows, secs)};
  });

  check("parallel-consistency", [&] {
    if (deterministic_mrr == 0) {
      deterministic_mrr = bench_eval(bench_train(bench_config(Model::TransE_L2))).mrr;
    }
    auto c = bench_config(Model::TransE_L2);
    c.threads = 4;
    const auto par = bench_eval(bench_train(c));
    const double gap = std::abs(par.mrr - deterministic_mrr);
    return std::pair{gap <= kParallelMrrGap,
                     fmt("MRR deterministic %.4f, 4 threads %.4f, gap %.4f", deterministic_mrr,
                         par.mrr, gap)};
  });

  std::printf("%s: %d failing\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
