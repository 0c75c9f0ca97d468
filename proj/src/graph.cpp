#include "kgr/graph.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "kgr/error.hpp"
#include "kgr/tsv.hpp"

namespace kgr {

TripleSet make_triple_set(std::span<const Triple> triples) {
  TripleSet set;
  set.reserve(triples.size());
  for (const auto& t : triples) set.insert(key_of(t));
  return set;
}

KnowledgeGraph KnowledgeGraph::build(std::span<const Predication> predications,
                                     BuildDiagnostics* diagnostics) {
  GraphBuilder builder;
  std::size_t record = 0;
  for (const auto& p : predications) {
    ++record;
    if (auto err = builder.add(p)) {
      if (diagnostics) {
        ++diagnostics->rejected;
        diagnostics->messages.push_back("record " + std::to_string(record) + ": " + *err);
      }
    }
  }
  return std::move(builder).finish();
}

std::optional<EntityIndex> KnowledgeGraph::find_entity(std::string_view cui) const {
  auto it = entity_lookup_.find(std::string(cui));
  if (it == entity_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationIndex> KnowledgeGraph::find_relation(std::string_view predicate) const {
  auto it = relation_lookup_.find(std::string(predicate));
  if (it == relation_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> KnowledgeGraph::find_triple(EntityIndex h, RelationIndex r,
                                                       EntityIndex t) const {
  auto it = triple_lookup_.find(TripleKey{h, r, t});
  if (it == triple_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const Edge> KnowledgeGraph::out_edges(EntityIndex e) const {
  return std::span<const Edge>(out_edges_).subspan(out_offsets_.at(e),
                                                   out_offsets_.at(e + 1) - out_offsets_[e]);
}

std::span<const Edge> KnowledgeGraph::in_edges(EntityIndex e) const {
  return std::span<const Edge>(in_edges_).subspan(in_offsets_.at(e),
                                                  in_offsets_.at(e + 1) - in_offsets_[e]);
}

void KnowledgeGraph::build_indices() {
  const std::size_t n = entities_.size();
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const auto& t : triples_) {
    ++out_offsets_[t.head + 1];
    ++in_offsets_[t.tail + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  out_edges_.assign(triples_.size(), Edge{});
  in_edges_.assign(triples_.size(), Edge{});
  std::vector<std::size_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    const auto& t = triples_[i];
    const auto idx = static_cast<std::uint32_t>(i);
    out_edges_[out_fill[t.head]++] = Edge{t.relation, t.tail, idx};
    in_edges_[in_fill[t.tail]++] = Edge{t.relation, t.head, idx};
  }
}

KnowledgeGraph KnowledgeGraph::subgraph(std::span<const std::size_t> triple_indices) const {
  GraphBuilder builder;
  for (auto i : triple_indices) {
    const auto& t = triples_.at(i);
    builder.add_triple(entities_[t.head], relations_[t.relation], entities_[t.tail],
                       t.earliest_date, t.support);
  }
  return std::move(builder).finish();
}

EntityIndex GraphBuilder::add_entity(const Entity& e) {
  auto [it, inserted] =
      g_.entity_lookup_.try_emplace(e.cui, static_cast<EntityIndex>(g_.entities_.size()));
  if (inserted) g_.entities_.push_back(e);
  return it->second;
}

RelationIndex GraphBuilder::add_relation(std::string_view predicate) {
  auto [it, inserted] = g_.relation_lookup_.try_emplace(
      std::string(predicate), static_cast<RelationIndex>(g_.relations_.size()));
  if (inserted) g_.relations_.emplace_back(predicate);
  return it->second;
}

void GraphBuilder::add_triple(const Entity& head, std::string_view predicate, const Entity& tail,
                              Date date, std::uint32_t support) {
  const auto h = add_entity(head);
  const auto r = add_relation(predicate);
  const auto t = add_entity(tail);
  auto [it, inserted] = g_.triple_lookup_.try_emplace(TripleKey{h, r, t}, g_.triples_.size());
  if (inserted) {
    g_.triples_.push_back(Triple{h, r, t, date, support});
    return;
  }
  auto& existing = g_.triples_[it->second];
  if (date < existing.earliest_date) existing.earliest_date = date;
  existing.support += support;
}

std::optional<std::string> GraphBuilder::add(const Predication& p) {
  if (p.subject.cui.empty()) return "empty subject CUI";
  if (p.object.cui.empty()) return "empty object CUI";
  if (p.predicate.empty()) return "empty predicate";
  if (p.confidence && !(*p.confidence >= 0.0 && *p.confidence <= 1.0)) {
    return "confidence outside [0,1]";
  }
  add_triple(p.subject, p.predicate, p.object, p.pub_date);
  return std::nullopt;
}

KnowledgeGraph GraphBuilder::finish() && {
  g_.build_indices();
  return std::move(g_);
}

std::vector<Degree> degree_centrality(const KnowledgeGraph& g) {
  std::vector<Degree> deg(g.entity_count());
  for (EntityIndex e = 0; e < g.entity_count(); ++e) {
    deg[e].in = static_cast<std::uint32_t>(g.in_edges(e).size());
    deg[e].out = static_cast<std::uint32_t>(g.out_edges(e).size());
  }
  return deg;
}

void write_graph_tsv(std::ostream& out, const KnowledgeGraph& g) {
  write_graph_tsv(out, g, g.triples());
}

void write_graph_tsv(std::ostream& out, const KnowledgeGraph& g, std::span<const Triple> triples) {
  for (const auto& t : triples) {
    out << g.entity(t.head).cui << '\t' << g.relation(t.relation) << '\t' << g.entity(t.tail).cui
        << '\t' << t.earliest_date.str() << '\n';
  }
}

KnowledgeGraph read_graph_tsv(std::istream& in, const std::vector<Entity>* names) {
  std::unordered_map<std::string_view, const Entity*> by_cui;
  if (names) {
    for (const auto& e : *names) by_cui.emplace(e.cui, &e);
  }
  auto resolve = [&](std::string_view cui) {
    if (auto it = by_cui.find(cui); it != by_cui.end()) return *it->second;
    return Entity{std::string(cui), {}, {}};
  };

  GraphBuilder builder;
  std::string line;
  std::size_t line_no = 0;
  while (tsv::next_line(in, line, line_no)) {
    if (line.empty()) continue;
    auto f = tsv::split(line);
    if (f.size() != 4) {
      throw ParseError("graph dump line " + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(f.size()));
    }
    if (f[0].empty() || f[1].empty() || f[2].empty()) {
      throw ParseError("graph dump line " + std::to_string(line_no) + ": empty field");
    }
    auto date = Date::parse(f[3]);
    if (!date) {
      throw ParseError("graph dump line " + std::to_string(line_no) + ": malformed date '" +
                       std::string(f[3]) + "'");
    }
    builder.add_triple(resolve(f[0]), f[1], resolve(f[2]), *date);
  }
  return std::move(builder).finish();
}

void write_entities_tsv(std::ostream& out, const KnowledgeGraph& g) {
  out << "cui\tname\tsemtype\n";
  for (const auto& e : g.entities()) out << e.cui << '\t' << e.name << '\t' << e.semtype << '\n';
}

std::vector<Entity> read_entities_tsv(std::istream& in) {
  std::vector<Entity> out;
  std::string line;
  std::size_t line_no = 0;
  if (!tsv::next_line(in, line, line_no) || line != "cui\tname\tsemtype") {
    throw ParseError("entity table: missing header 'cui\\tname\\tsemtype'");
  }
  while (tsv::next_line(in, line, line_no)) {
    if (line.empty()) continue;
    auto f = tsv::split(line);
    if (f.size() != 3 || f[0].empty()) {
      throw ParseError("entity table line " + std::to_string(line_no) + ": expected 3 fields");
    }
    out.push_back(Entity{std::string(f[0]), std::string(f[1]), std::string(f[2])});
  }
  return out;
}

KnowledgeGraph load_graph(const std::string& graph_path, const std::string& entities_path) {
  std::ifstream gin(graph_path);
  if (!gin) throw ValidationError("cannot open graph dump: " + graph_path);
  if (entities_path.empty()) return read_graph_tsv(gin);
  std::ifstream ein(entities_path);
  if (!ein) throw ValidationError("cannot open entity table: " + entities_path);
  auto names = read_entities_tsv(ein);
  return read_graph_tsv(gin, &names);
}

}  // namespace kgr
