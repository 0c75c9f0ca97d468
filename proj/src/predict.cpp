#include "kgr/predict.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "kgr/error.hpp"
#include "kgr/tsv.hpp"

namespace kgr {

std::vector<std::string> relation_presets(std::string_view category) {
  if (category == "drug" || category == "chemical") return {"TREATS", "PREVENTS"};
  if (category == "supplement") return {"AFFECTS"};
  throw ValidationError("unknown candidate category '" + std::string(category) +
                        "' (valid: drug, chemical, supplement)");
}

PredictionResult enumerate_and_rank(const EmbeddingStore& store, const KnowledgeGraph& g,
                                    const TripleSet& training, const PredictionQuery& query) {
  if (query.top_n == 0) throw ValidationError("predict: top_n must be positive");
  if (query.relations.empty()) throw ValidationError("predict: no relations given");
  if (store.entity_count() != g.entity_count() || store.relation_count() != g.relation_count()) {
    throw ValidationError("predict: embedding store does not match the graph");
  }
  PredictionResult result;
  auto resolve = [&](const std::set<std::string>& cuis) {
    std::vector<EntityIndex> out;
    for (const auto& cui : cuis) {
      if (auto e = g.find_entity(cui)) {
        out.push_back(*e);
      } else {
        result.unresolved.push_back(cui);
      }
    }
    return out;
  };
  const auto heads = resolve(query.candidates.cuis);
  const auto tails = resolve(query.targets);
  if (heads.empty()) {
    throw ValidationError("predict: none of the " + std::to_string(query.candidates.cuis.size()) +
                          " '" + query.candidates.label + "' candidates is in the graph");
  }
  if (tails.empty()) throw ValidationError("predict: none of the target CUIs is in the graph");
  std::vector<RelationIndex> rels;
  for (const auto& name : query.relations) {
    auto r = g.find_relation(name);
    if (!r) throw ValidationError("predict: relation '" + name + "' is not in the graph");
    rels.push_back(*r);
  }

  struct Scored {
    TripleKey key;
    double score;
    bool novel;
  };
  std::vector<Scored> all;
  all.reserve(heads.size() * rels.size() * tails.size());
  for (auto h : heads) {
    for (auto r : rels) {
      for (auto t : tails) {
        const TripleKey key{h, r, t};
        const bool novel = training.count(key) == 0;
        ++result.enumerated;
        if (query.novel_only && !novel) continue;
        all.push_back({key, score(store, h, r, t), novel});
      }
    }
  }
  auto before = [&](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto& ha = g.entity(a.key.head).cui;
    const auto& hb = g.entity(b.key.head).cui;
    if (ha != hb) return ha < hb;
    const auto& ra = g.relation(a.key.relation);
    const auto& rb = g.relation(b.key.relation);
    if (ra != rb) return ra < rb;
    return g.entity(a.key.tail).cui < g.entity(b.key.tail).cui;
  };
  const std::size_t keep = std::min(query.top_n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), before);
  for (std::size_t i = 0; i < keep; ++i) {
    const auto& s = all[i];
    result.rows.push_back({g.entity(s.key.head), g.relation(s.key.relation), g.entity(s.key.tail),
                           s.score, s.novel});
  }
  return result;
}

void write_predictions(std::ostream& out, const PredictionTable& table) {
  out << "# model=" << table.model << " checkpoint=" << table.checkpoint << '\n';
  out << "rank\thead_cui\thead_name\tpredicate\ttail_cui\ttail_name\tscore\tnovel\n";
  std::size_t rank = 0;
  for (const auto& r : table.rows) {
    out << ++rank << '\t' << r.head.cui << '\t' << r.head.name << '\t' << r.relation << '\t'
        << r.tail.cui << '\t' << r.tail.name << '\t' << tsv::format_double(r.score) << '\t'
        << (r.novel ? 1 : 0) << '\n';
  }
}

PredictionTable read_predictions(std::istream& in) {
  PredictionTable table;
  std::string line;
  std::size_t line_no = 0;
  if (!tsv::next_line(in, line, line_no) || line.rfind("# model=", 0) != 0) {
    throw ParseError("prediction file: missing '# model=' header");
  }
  const auto ck = line.find(" checkpoint=");
  if (ck == std::string::npos) throw ParseError("prediction file: header lacks checkpoint");
  table.model = line.substr(8, ck - 8);
  table.checkpoint = line.substr(ck + 12);
  if (!tsv::next_line(in, line, line_no) ||
      line != "rank\thead_cui\thead_name\tpredicate\ttail_cui\ttail_name\tscore\tnovel") {
    throw ParseError("prediction file: bad column header");
  }
  while (tsv::next_line(in, line, line_no)) {
    if (line.empty()) continue;
    auto f = tsv::split(line);
    auto where = "prediction file line " + std::to_string(line_no);
    if (f.size() != 8) throw ParseError(where + ": expected 8 fields");
    auto rank = tsv::parse_int(f[0]);
    if (!rank || static_cast<std::size_t>(*rank) != table.rows.size() + 1) {
      throw ParseError(where + ": ranks must count up from 1");
    }
    auto s = tsv::parse_double(f[6]);
    if (!s) throw ParseError(where + ": bad score");
    if (f[7] != "0" && f[7] != "1") throw ParseError(where + ": novel must be 0 or 1");
    table.rows.push_back({Entity{std::string(f[1]), std::string(f[2]), {}}, std::string(f[3]),
                          Entity{std::string(f[4]), std::string(f[5]), {}}, *s, f[7] == "1"});
  }
  return table;
}

}  // namespace kgr
