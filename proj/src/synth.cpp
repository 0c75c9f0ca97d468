#include "kgr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "kgr/defaults.hpp"
#include "kgr/error.hpp"

namespace kgr::synth {
namespace {

std::string make_cui(std::uint32_t base, std::uint32_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "C%07u", base + i);
  return buf;
}

Date random_date(std::mt19937_64& rng, Date from, Date to_exclusive) {
  std::uniform_int_distribution<std::int32_t> pick(from.days_since_epoch(),
                                                   to_exclusive.days_since_epoch() - 1);
  return Date::from_days(pick(rng));
}

}  // namespace

Benchmark make_benchmark(std::uint64_t seed, std::size_t n_triples) {
  constexpr int kRows = 4;
  constexpr int kCols = 5;
  constexpr int kClusterSize = 10;
  struct Move {
    const char* name;
    int drow;
    int dcol;
  };
  constexpr Move kMoves[] = {{"MOVES_RIGHT", 0, 1},
                             {"MOVES_DOWN", 1, 0},
                             {"MOVES_RIGHT_TWICE", 0, 2},
                             {"MOVES_DIAGONAL", 1, 1}};

  std::vector<Entity> entities;
  for (int c = 0; c < kRows * kCols; ++c) {
    for (int m = 0; m < kClusterSize; ++m) {
      const auto i = static_cast<std::uint32_t>(c * kClusterSize + m);
      entities.push_back({make_cui(8000000, i), "cluster " + std::to_string(c) + " member " +
                                                    std::to_string(m),
                          "gngm"});
    }
  }

  struct Candidate {
    std::uint32_t h, r, t;
  };
  std::vector<Candidate> pool;
  for (std::uint32_t r = 0; r < std::size(kMoves); ++r) {
    for (int row = 0; row < kRows; ++row) {
      for (int col = 0; col < kCols; ++col) {
        const int row2 = row + kMoves[r].drow;
        const int col2 = col + kMoves[r].dcol;
        if (row2 >= kRows || col2 >= kCols) continue;
        const int src = row * kCols + col;
        const int dst = row2 * kCols + col2;
        for (int a = 0; a < kClusterSize; ++a) {
          for (int b = 0; b < kClusterSize; ++b) {
            pool.push_back({static_cast<std::uint32_t>(src * kClusterSize + a), r,
                            static_cast<std::uint32_t>(dst * kClusterSize + b)});
          }
        }
      }
    }
  }
  if (n_triples > pool.size()) {
    throw ValidationError("benchmark: at most " + std::to_string(pool.size()) + " triples");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(n_triples);

  Benchmark b;
  b.train_cutoff = Date::from_ymd(2019, 1, 1);
  b.test_cutoff = Date::from_ymd(2021, 1, 1);
  const Date start = Date::from_ymd(2000, 1, 1);
  const Date end = Date::from_ymd(2023, 1, 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t serial = 0;
  for (const auto& c : pool) {
    const double slice = u(rng);
    Date d = slice < 0.85   ? random_date(rng, start, b.train_cutoff)
             : slice < 0.90 ? random_date(rng, b.train_cutoff, b.test_cutoff)
                            : random_date(rng, b.test_cutoff, end);
    b.predications.push_back({entities[c.h], kMoves[c.r].name, entities[c.t],
                              std::to_string(10000000 + serial++), "", d, std::nullopt});
  }
  return b;
}

DemoCorpus make_demo_corpus(std::uint64_t seed, std::size_t n_predications) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  constexpr std::uint32_t kMechanisms = 6;
  struct Node {
    Entity entity;
    std::uint32_t mechanism;
  };
  std::vector<Node> disease;
  for (const auto& [cui, name] : kAdWhitelist) {
    disease.push_back({Entity{std::string(cui), std::string(name), "dsyn"}, 0});
  }
  auto make_group = [&](std::uint32_t base, std::size_t n, const char* stem, const char* semtype) {
    std::vector<Node> out;
    for (std::uint32_t i = 0; i < n; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s %02u", stem, i + 1);
      out.push_back({Entity{make_cui(base, i), name, semtype},
                     static_cast<std::uint32_t>(rng() % kMechanisms)});
    }
    return out;
  };
  auto drugs = make_group(9100000, 30, "Synthetic drug", "clnd");
  auto chems = make_group(9200000, 30, "Synthetic compound", "orch");
  auto supps = make_group(9300000, 20, "Synthetic food", "food");
  auto genes = make_group(9400000, 48, "Synthetic gene", "gngm");
  auto funcs = make_group(9500000, 12, "Synthetic cell function", "celf");
  // Generic concepts that the semantic-type rules should remove.
  const char* generic_types[] = {"acty", "inpr", "mnob", "ocdi", "orgt", "phpr", "qlco", "tmco"};
  std::vector<Node> generic;
  for (std::uint32_t i = 0; i < std::size(generic_types); ++i) {
    generic.push_back({Entity{make_cui(9600000, i), std::string("Generic concept ") +
                                                        generic_types[i],
                              generic_types[i]},
                       0});
  }
  // Mechanisms 0-2 are "disease-modifying"; their genes associate with disease terms.
  auto effective = [](std::uint32_t m) { return m < 3; };

  struct Planned {
    const Node* head;
    const char* predicate;
    const Node* tail;
    double weight;  // expected number of predications
    bool late;      // first published around or after the test cutoff
  };
  std::vector<Planned> plan;
  auto pick = [&](const std::vector<Node>& v) { return &v[rng() % v.size()]; };
  auto pick_in = [&](const std::vector<Node>& v, std::uint32_t m) -> const Node* {
    for (int tries = 0; tries < 64; ++tries) {
      const Node* n = pick(v);
      if (n->mechanism == m) return n;
    }
    return pick(v);
  };

  for (const auto* group : {&drugs, &chems, &supps}) {
    for (const auto& c : *group) {
      for (int k = 0; k < 4; ++k) {
        plan.push_back({&c, (k % 2) ? "STIMULATES" : "INHIBITS", pick_in(genes, c.mechanism),
                        2.0, false});
      }
      plan.push_back({&c, "INTERACTS_WITH", pick(*group), 1.0, false});
      if (effective(c.mechanism)) {
        const bool supplement = group == &supps;
        const int n_links = 2 + static_cast<int>(rng() % 3);
        for (int k = 0; k < n_links; ++k) {
          const char* pred = supplement ? "AFFECTS" : ((k % 2) ? "PREVENTS" : "TREATS");
          plan.push_back({&c, pred, pick(disease), 1.5, u(rng) < 0.3});
        }
      } else if (u(rng) < 0.3) {
        plan.push_back({&c, "AFFECTS", pick(disease), 1.0, false});
      }
    }
  }
  for (const auto& g : genes) {
    if (effective(g.mechanism)) {
      for (int k = 0; k < 3; ++k) {
        plan.push_back({&g, k == 0 ? "CAUSES" : "ASSOCIATED_WITH", pick(disease), 3.0, false});
      }
    }
    plan.push_back({&g, "INTERACTS_WITH", pick_in(genes, g.mechanism), 1.5, false});
    plan.push_back({&g, "AFFECTS", pick_in(funcs, g.mechanism), 1.5, false});
  }
  for (const auto& f : funcs) {
    plan.push_back({&f, "AFFECTS", pick(disease), 2.0, false});
  }
  for (const auto& gen : generic) {
    for (int k = 0; k < 6; ++k) {
      plan.push_back({&gen, "ASSOCIATED_WITH", k % 2 ? pick(disease) : pick(genes), 2.0, false});
    }
  }
  // Background noise between random nodes.
  for (int k = 0; k < 150; ++k) {
    plan.push_back({pick(genes), "ASSOCIATED_WITH", pick(funcs), 1.0, false});
  }

  double total_weight = 0;
  for (const auto& p : plan) total_weight += p.weight;
  const double scale = static_cast<double>(n_predications) / total_weight;

  DemoCorpus corpus;
  const Date start = Date::from_ymd(1995, 1, 1);
  const Date train_cutoff = Date::from_ymd(2019, 1, 1);
  const Date end = Date::from_ymd(2023, 1, 1);
  std::size_t pmid = 20000000;
  for (const auto& p : plan) {
    const double expected = p.weight * scale;
    std::poisson_distribution<int> count(std::max(expected - 1.0, 0.05));
    const int n = 1 + count(rng);
    for (int i = 0; i < n; ++i) {
      const Date d = p.late ? random_date(rng, train_cutoff, end) : random_date(rng, start, end);
      Predication pred{p.head->entity, p.predicate, p.tail->entity, std::to_string(pmid++),
                       p.head->entity.name + " " + p.predicate + " " + p.tail->entity.name + ".",
                       d, std::nullopt};
      // Simulated classifier output for about 70% of records.
      if (u(rng) < 0.7) {
        const double s = u(rng) < 0.15 ? 0.5 * u(rng) : 0.55 + 0.45 * u(rng);
        corpus.scores.scores[score_key(pred)] = std::round(s * 1000.0) / 1000.0;
      }
      corpus.predications.push_back(std::move(pred));
    }
  }
  std::shuffle(corpus.predications.begin(), corpus.predications.end(), rng);

  auto to_set = [](const std::string& label, const std::vector<Node>& v) {
    CandidateSet c{label, {}};
    for (const auto& n : v) c.cuis.insert(n.entity.cui);
    return c;
  };
  corpus.candidates.emplace("drug", to_set("drug", drugs));
  corpus.candidates.emplace("chemical", to_set("chemical", chems));
  corpus.candidates.emplace("supplement", to_set("supplement", supps));
  return corpus;
}

void write_demo_corpus(const DemoCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + (std::filesystem::path(dir) / name).string());
    return out;
  };
  {
    auto out = open("predications.tsv");
    write_predications(out, corpus.predications);
  }
  {
    auto out = open("scores.tsv");
    write_scores(out, corpus.scores);
  }
  for (const auto& [label, set] : corpus.candidates) {
    auto out = open("candidates_" + label + ".txt");
    out << "# " << label << " candidates\n";
    for (const auto& cui : set.cuis) out << cui << '\n';
  }
}

}  // namespace kgr::synth
