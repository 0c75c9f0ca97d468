#include "kgr/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "kgr/error.hpp"

namespace kgr {

TimeSplit time_split(const KnowledgeGraph& g, Date train_cutoff, Date test_cutoff) {
  if (!(train_cutoff < test_cutoff)) {
    throw ValidationError("time_split: train cutoff " + train_cutoff.str() +
                          " must precede test cutoff " + test_cutoff.str());
  }
  TimeSplit split{train_cutoff, test_cutoff, {}, {}, {}, 0};
  for (const auto& t : g.triples()) {
    if (t.earliest_date < train_cutoff) {
      split.train.push_back(t);
    } else if (t.earliest_date < test_cutoff) {
      split.valid.push_back(t);
    } else {
      split.test.push_back(t);
    }
  }
  if (split.train.empty()) {
    throw ValidationError("time_split: no triple dated before " + train_cutoff.str());
  }
  std::vector<char> in_train(g.entity_count(), 0);
  for (const auto& t : split.train) in_train[t.head] = in_train[t.tail] = 1;
  std::vector<char> counted(g.entity_count(), 0);
  auto visit = [&](EntityIndex e) {
    if (!in_train[e] && !counted[e]) {
      counted[e] = 1;
      ++split.cold_start;
    }
  };
  for (const auto* slice : {&split.valid, &split.test}) {
    for (const auto& t : *slice) {
      visit(t.head);
      visit(t.tail);
    }
  }
  return split;
}

std::string_view mode_name(RankMode m) { return m == RankMode::Raw ? "raw" : "filtered"; }

RankMode parse_mode(std::string_view name) {
  if (name == "raw") return RankMode::Raw;
  if (name == "filtered") return RankMode::Filtered;
  throw ValidationError("unknown ranking mode '" + std::string(name) + "' (expected raw or filtered)");
}

double rank_query(const EmbeddingStore& store, const Query& query, RankMode mode,
                  const TripleSet* known) {
  if (mode == RankMode::Filtered && !known) {
    throw ValidationError("rank_query: filtered mode needs the known triple set");
  }
  const auto& q = query.triple;
  const bool head = query.side == QuerySide::Head;
  const EntityIndex answer = head ? q.head : q.tail;
  const double target = score(store, q.head, q.relation, q.tail);
  std::size_t higher = 0;
  std::size_t ties = 0;
  const auto n = static_cast<EntityIndex>(store.entity_count());
  const auto rel = store.relation(q.relation);
  const auto fixed = store.entity(head ? q.tail : q.head);
  for (EntityIndex c = 0; c < n; ++c) {
    if (c == answer) continue;
    TripleKey cand = q;
    (head ? cand.head : cand.tail) = c;
    if (mode == RankMode::Filtered && known->count(cand)) continue;
    const double s = head ? score_vectors(store.model(), store.entity(c), rel, fixed)
                          : score_vectors(store.model(), fixed, rel, store.entity(c));
    if (s > target) {
      ++higher;
    } else if (s == target) {
      ++ties;
    }
  }
  return 1.0 + static_cast<double>(higher) + 0.5 * static_cast<double>(ties);
}

RankingReport metrics(std::span<const double> ranks) {
  if (ranks.empty()) throw ValidationError("metrics: empty rank list");
  RankingReport r;
  r.ranks.assign(ranks.begin(), ranks.end());
  double sum = 0, rsum = 0;
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  for (double x : ranks) {
    sum += x;
    rsum += 1.0 / x;
    h1 += x <= 1.0;
    h3 += x <= 3.0;
    h10 += x <= 10.0;
  }
  const double n = static_cast<double>(ranks.size());
  r.mr = sum / n;
  r.mrr = rsum / n;
  r.hits1 = static_cast<double>(h1) / n;
  r.hits3 = static_cast<double>(h3) / n;
  r.hits10 = static_cast<double>(h10) / n;
  r.n_queries = ranks.size();
  return r;
}

RankingReport evaluate(const EmbeddingStore& store, std::span<const Triple> test, RankMode mode,
                       const TripleSet* known, std::size_t threads) {
  // Query 2i hides the head of test[i], query 2i+1 hides its tail.
  std::vector<double> ranks(2 * test.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < test.size(); i += step) {
      const auto key = key_of(test[i]);
      ranks[2 * i] = rank_query(store, {key, QuerySide::Head}, mode, known);
      ranks[2 * i + 1] = rank_query(store, {key, QuerySide::Tail}, mode, known);
    }
  };
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
  }
  auto report = metrics(ranks);
  report.model = std::string(model_name(store.model()));
  report.mode = mode;
  return report;
}

std::string report_json(const RankingReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["mode"] = std::string(mode_name(r.mode));
  j["mr"] = r.mr;
  j["mrr"] = r.mrr;
  j["hits1"] = r.hits1;
  j["hits3"] = r.hits3;
  j["hits10"] = r.hits10;
  j["n_queries"] = r.n_queries;
  j["n_cold_start"] = r.n_cold_start;
  return j.dump(2) + "\n";
}

RankingReport parse_report_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what());
  }
  static constexpr std::string_view fields[] = {"model", "mode",   "mr",        "mrr",
                                                "hits1", "hits3",  "hits10",    "n_queries",
                                                "n_cold_start"};
  if (!j.is_object() || j.size() != std::size(fields)) {
    throw ParseError("report JSON: expected an object with exactly 9 fields");
  }
  RankingReport r;
  try {
    for (auto f : fields) {
      if (!j.contains(std::string(f))) throw ParseError("report JSON: missing " + std::string(f));
    }
    r.model = j.at("model").get<std::string>();
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.mr = j.at("mr").get<double>();
    r.mrr = j.at("mrr").get<double>();
    r.hits1 = j.at("hits1").get<double>();
    r.hits3 = j.at("hits3").get<double>();
    r.hits10 = j.at("hits10").get<double>();
    r.n_queries = j.at("n_queries").get<std::size_t>();
    r.n_cold_start = j.at("n_cold_start").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what());
  }
  return r;
}

void write_report_table(std::ostream& out, const RankingReport& r) {
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-9s %10s %8s %8s %8s %8s %9s %10s\n", "model", "mode",
                "MR", "MRR", "Hits@1", "Hits@3", "Hits@10", "queries", "cold-start");
  out << line;
  std::snprintf(line, sizeof line, "%-10s %-9s %10.4f %8.4f %8.4f %8.4f %8.4f %9zu %10zu\n",
                r.model.c_str(), std::string(mode_name(r.mode)).c_str(), r.mr, r.mrr, r.hits1,
                r.hits3, r.hits10, r.n_queries, r.n_cold_start);
  out << line;
}

}  // namespace kgr
