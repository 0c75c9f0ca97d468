#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kgr/graph.hpp"
#include "kgr/ingest.hpp"

namespace kgr::synth {

/// Link-prediction benchmark: 200 entities in 20 clusters of 10 laid out on a
/// 4x5 grid, with four relations that move between clusters (right, down,
/// two-right, diagonal). Two-right and diagonal are compositions of the first
/// two. Roughly 85% of triples predate `train_cutoff`, 5% fall between the
/// cutoffs and 10% come after `test_cutoff`.
struct Benchmark {
  std::vector<Predication> predications;
  Date train_cutoff;
  Date test_cutoff;
};

Benchmark make_benchmark(std::uint64_t seed, std::size_t n_triples = 3000);

/// Small biomedical-flavoured corpus exercising every pipeline stage:
/// whitelist disease terms, drug/chemical/supplement candidates linked to
/// disease terms through gene "mechanisms", generic concepts with excluded
/// semantic types, duplicate predications and an external score table.
struct DemoCorpus {
  std::vector<Predication> predications;
  ScoreTable scores;
  std::map<std::string, CandidateSet> candidates;  // keyed by category
};

DemoCorpus make_demo_corpus(std::uint64_t seed, std::size_t n_predications = 4000);

/// Writes predications.tsv, scores.tsv and candidates_<category>.txt into `dir`.
void write_demo_corpus(const DemoCorpus& corpus, const std::string& dir);

}  // namespace kgr::synth
