#include "kgr/filter.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "kgr/error.hpp"
#include "kgr/tsv.hpp"

namespace kgr {

std::vector<Predication> exclude_semtypes(std::span<const Predication> predications,
                                          const SemTypeRuleSet& rules) {
  std::vector<Predication> out;
  out.reserve(predications.size());
  const auto& ex = rules.excluded_types;
  for (const auto& p : predications) {
    if (ex.count(p.subject.semtype) || ex.count(p.object.semtype)) continue;
    out.push_back(p);
  }
  return out;
}

namespace {

// phi(d) = (1 + d) ln(1 + d) - d, the per-cell divergence O ln(O/E) - O + E
// divided by E, where d = (O - E) / E. Non-negative; the series branch avoids
// cancellation near d = 0.
double divergence(double d) {
  if (std::abs(d) < 0.1) {
    // sum_{k>=2} (-1)^k d^k / (k (k - 1))
    double term = d * d;
    double sum = 0;
    for (int k = 2; k < 40; ++k) {
      const double add = term / (static_cast<double>(k) * (k - 1));
      sum += (k % 2 == 0) ? add : -add;
      term *= d;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return (1.0 + d) * std::log1p(d) - d;
}

}  // namespace

double g2(const ContingencyTable& t) {
  const std::uint64_t n = t.n();
  if (n == 0) throw ValidationError("g2: contingency table is all zeros");
  const std::uint64_t row[2] = {t.o11 + t.o12, t.o21 + t.o22};
  const std::uint64_t col[2] = {t.o11 + t.o21, t.o12 + t.o22};
  const std::uint64_t obs[2][2] = {{t.o11, t.o12}, {t.o21, t.o22}};

  // Sum over cells of O ln(O/E) - O + E. The extra (E - O) terms sum to zero
  // over the table, and each cell's contribution is non-negative, so the
  // total has no cancellation.
  double sum = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const auto margin = static_cast<unsigned __int128>(row[i]) * col[j];
      if (margin == 0) continue;  // then O = E = 0
      const double expected = static_cast<double>(margin) / static_cast<double>(n);
      if (obs[i][j] == 0) {
        sum += expected;
        continue;
      }
      // (O - E) / E = (O n - row col) / (row col), numerator exact in integers.
      const auto on = static_cast<__int128>(static_cast<unsigned __int128>(obs[i][j]) * n);
      const auto diff = on - static_cast<__int128>(margin);
      if (diff == 0) continue;
      const double d = static_cast<double>(diff) / static_cast<double>(margin);
      sum += expected * divergence(d);
    }
  }
  return 2.0 * sum;
}

ContingencyTable pair_contingency(const KnowledgeGraph& g, EntityIndex subject,
                                  EntityIndex object) {
  std::uint64_t total = 0;
  for (const auto& t : g.triples()) total += t.support;
  std::uint64_t as_subject = 0;
  std::uint64_t joint = 0;
  for (const auto& e : g.out_edges(subject)) {
    const auto s = g.triples()[e.triple].support;
    as_subject += s;
    if (e.neighbor == object) joint += s;
  }
  std::uint64_t as_object = 0;
  for (const auto& e : g.in_edges(object)) as_object += g.triples()[e.triple].support;
  return {joint, as_subject - joint, as_object - joint, total - as_subject - as_object + joint};
}

std::vector<double> min_max_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double range = *hi - *lo;
  if (!(range > 0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    // The max element divides exactly to 1.
    out[i] = (values[i] - min) / range;
  }
  return out;
}

std::vector<TripleScore> score_triples(const KnowledgeGraph& g) {
  const auto triples = g.triples();
  const auto degree = degree_centrality(g);

  std::uint64_t total = 0;
  std::vector<std::uint64_t> subject_count(g.entity_count(), 0);
  std::vector<std::uint64_t> object_count(g.entity_count(), 0);
  for (const auto& t : triples) {
    total += t.support;
    subject_count[t.head] += t.support;
    object_count[t.tail] += t.support;
  }

  // Joint count of each (head, tail) pair summed over every relation.
  auto pair_key = [](const Triple& t) {
    return (static_cast<std::uint64_t>(t.head) << 32) | t.tail;
  };
  std::unordered_map<std::uint64_t, std::uint64_t> pair_count;
  pair_count.reserve(triples.size());
  for (const auto& t : triples) pair_count[pair_key(t)] += t.support;

  std::vector<double> a_in(triples.size());
  std::vector<double> a_out(triples.size());
  std::vector<double> assoc(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    a_in[i] = degree[t.tail].in;
    a_out[i] = degree[t.head].out;
    const std::uint64_t joint = pair_count[pair_key(t)];
    const ContingencyTable table{joint, subject_count[t.head] - joint,
                                 object_count[t.tail] - joint,
                                 total - subject_count[t.head] - object_count[t.tail] + joint};
    assoc[i] = g2(table);
  }

  const auto in_n = min_max_normalize(a_in);
  const auto out_n = min_max_normalize(a_out);
  const auto g2_n = min_max_normalize(assoc);
  std::vector<TripleScore> scores(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    scores[i] = TripleScore{a_in[i],  a_out[i], assoc[i], in_n[i],
                            out_n[i], g2_n[i],  in_n[i] + out_n[i] + g2_n[i]};
  }
  return scores;
}

std::vector<std::size_t> apply_cutoff(const KnowledgeGraph& g, std::span<const TripleScore> scores,
                                      const Whitelist& whitelist, std::size_t k) {
  const auto triples = g.triples();
  if (scores.size() != triples.size()) {
    throw ValidationError("apply_cutoff: score count does not match triple count");
  }
  std::vector<char> protected_entity(g.entity_count(), 0);
  for (EntityIndex e = 0; e < g.entity_count(); ++e) {
    protected_entity[e] = whitelist.contains(g.entity(e).cui) ? 1 : 0;
  }

  std::vector<std::size_t> retained;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (protected_entity[triples[i].head] || protected_entity[triples[i].tail]) {
      retained.push_back(i);
    } else {
      rest.push_back(i);
    }
  }
  if (k < retained.size() && k < triples.size()) {
    throw ValidationError("apply_cutoff: keep=" + std::to_string(k) + " is smaller than the " +
                          std::to_string(retained.size()) + " whitelist-protected triples");
  }
  const std::size_t target = std::min(k, triples.size());
  const std::size_t extra = target - retained.size();
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a].fused != scores[b].fused) return scores[a].fused > scores[b].fused;
    return key_of(triples[a]) < key_of(triples[b]);
  };
  std::partial_sort(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(extra), rest.end(),
                    better);
  retained.insert(retained.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(extra));
  std::sort(retained.begin(), retained.end());
  return retained;
}

std::vector<Predication> select_predications(std::span<const Predication> predications,
                                             const KnowledgeGraph& g,
                                             std::span<const std::size_t> retained) {
  std::vector<char> keep(g.triple_count(), 0);
  for (auto i : retained) keep.at(i) = 1;
  std::vector<Predication> out;
  for (const auto& p : predications) {
    auto h = g.find_entity(p.subject.cui);
    auto r = g.find_relation(p.predicate);
    auto t = g.find_entity(p.object.cui);
    if (!h || !r || !t) continue;
    auto idx = g.find_triple(*h, *r, *t);
    if (idx && keep[*idx]) out.push_back(p);
  }
  return out;
}

std::vector<Predication> apply_confidence(std::span<const Predication> predications,
                                          const ScoreTable& scores,
                                          const ConfidenceOptions& options) {
  if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) {
    throw ValidationError("score threshold must lie in [0,1]");
  }
  std::vector<Predication> out;
  out.reserve(predications.size());
  for (const auto& p : predications) {
    std::optional<double> score = p.confidence;
    if (auto it = scores.scores.find(score_key(p)); it != scores.scores.end()) score = it->second;
    if (!score) {
      if (!options.strict) out.push_back(p);
      continue;
    }
    if (*score < options.threshold) continue;
    out.push_back(p);
    out.back().confidence = score;
  }
  return out;
}

void write_triple_scores(std::ostream& out, const KnowledgeGraph& g,
                         std::span<const TripleScore> scores,
                         std::span<const std::size_t> retained) {
  std::vector<char> keep(g.triple_count(), 0);
  for (auto i : retained) keep.at(i) = 1;
  out << "head_cui\tpredicate\ttail_cui\ta_in\ta_out\tg2\ta_in_norm\ta_out_norm\tg2_norm\tfused\t"
         "retained\n";
  const auto triples = g.triples();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    const auto& s = scores[i];
    out << g.entity(t.head).cui << '\t' << g.relation(t.relation) << '\t' << g.entity(t.tail).cui
        << '\t' << tsv::format_double(s.a_in) << '\t' << tsv::format_double(s.a_out) << '\t'
        << tsv::format_double(s.g2) << '\t' << tsv::format_double(s.a_in_norm) << '\t'
        << tsv::format_double(s.a_out_norm) << '\t' << tsv::format_double(s.g2_norm) << '\t'
        << tsv::format_double(s.fused) << '\t' << (keep[i] ? 1 : 0) << '\n';
  }
}

std::vector<TripleScoreRow> read_triple_scores(std::istream& in) {
  std::vector<TripleScoreRow> rows;
  std::string line;
  std::size_t line_no = 0;
  if (!tsv::next_line(in, line, line_no) || line.rfind("head_cui\tpredicate\ttail_cui", 0) != 0) {
    throw ParseError("triple score file: missing header");
  }
  while (tsv::next_line(in, line, line_no)) {
    if (line.empty()) continue;
    auto f = tsv::split(line);
    if (f.size() != 11) {
      throw ParseError("triple score file line " + std::to_string(line_no) +
                       ": expected 11 fields");
    }
    TripleScoreRow row{std::string(f[0]), std::string(f[1]), std::string(f[2]), {}, false};
    double* fields[] = {&row.score.a_in,       &row.score.a_out,   &row.score.g2,
                        &row.score.a_in_norm,  &row.score.a_out_norm, &row.score.g2_norm,
                        &row.score.fused};
    for (std::size_t c = 0; c < 7; ++c) {
      auto v = tsv::parse_double(f[3 + c]);
      if (!v) {
        throw ParseError("triple score file line " + std::to_string(line_no) + ": bad number");
      }
      *fields[c] = *v;
    }
    if (f[10] != "0" && f[10] != "1") {
      throw ParseError("triple score file line " + std::to_string(line_no) +
                       ": retained must be 0 or 1");
    }
    row.retained = f[10] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kgr
