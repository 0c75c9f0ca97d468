#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgr/date.hpp"

namespace kgr {

using EntityIndex = std::uint32_t;
using RelationIndex = std::uint32_t;

/// A UMLS-style concept. `cui` identifies it; name and semtype are descriptive.
struct Entity {
  std::string cui;
  std::string name;
  std::string semtype;

  friend bool operator==(const Entity&, const Entity&) = default;
};

/// One literature-extracted subject-predicate-object occurrence with provenance.
struct Predication {
  Entity subject;
  std::string predicate;
  Entity object;
  std::string pmid;
  std::string sentence;
  Date pub_date;
  std::optional<double> confidence;

  friend bool operator==(const Predication&, const Predication&) = default;
};

/// Deduplicated edge. `support` counts the predications collapsed into it.
struct Triple {
  EntityIndex head = 0;
  RelationIndex relation = 0;
  EntityIndex tail = 0;
  Date earliest_date;
  std::uint32_t support = 1;
};

struct TripleKey {
  EntityIndex head = 0;
  RelationIndex relation = 0;
  EntityIndex tail = 0;

  friend bool operator==(const TripleKey&, const TripleKey&) = default;
  friend auto operator<=>(const TripleKey&, const TripleKey&) = default;
};

inline TripleKey key_of(const Triple& t) { return {t.head, t.relation, t.tail}; }

struct TripleKeyHash {
  std::size_t operator()(const TripleKey& k) const noexcept {
    std::uint64_t h = (static_cast<std::uint64_t>(k.head) << 32) ^ k.tail;
    h ^= static_cast<std::uint64_t>(k.relation) * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

using TripleSet = std::unordered_set<TripleKey, TripleKeyHash>;

TripleSet make_triple_set(std::span<const Triple> triples);

/// Adjacency slot: the relation and the entity at the other end, plus the triple's index.
struct Edge {
  RelationIndex relation = 0;
  EntityIndex neighbor = 0;
  std::uint32_t triple = 0;
};

struct BuildDiagnostics {
  std::size_t rejected = 0;
  std::vector<std::string> messages;
};

class GraphBuilder;

/// Deduplicated triple set with entity/relation dictionaries and CSR in/out indices.
/// Immutable once built.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  /// Collapses duplicate (subject, predicate, object) records into one Triple
  /// keeping the earliest date. Dense indices follow first-seen order.
  /// Records that violate Predication invariants are rejected and reported.
  static KnowledgeGraph build(std::span<const Predication> predications,
                              BuildDiagnostics* diagnostics = nullptr);

  std::size_t entity_count() const { return entities_.size(); }
  std::size_t relation_count() const { return relations_.size(); }
  std::size_t triple_count() const { return triples_.size(); }

  const Entity& entity(EntityIndex i) const { return entities_.at(i); }
  const std::string& relation(RelationIndex i) const { return relations_.at(i); }
  std::span<const Entity> entities() const { return entities_; }
  std::span<const std::string> relations() const { return relations_; }
  std::span<const Triple> triples() const { return triples_; }

  std::optional<EntityIndex> find_entity(std::string_view cui) const;
  std::optional<RelationIndex> find_relation(std::string_view predicate) const;
  std::optional<std::size_t> find_triple(EntityIndex h, RelationIndex r, EntityIndex t) const;
  bool contains(EntityIndex h, RelationIndex r, EntityIndex t) const {
    return find_triple(h, r, t).has_value();
  }

  /// (relation, tail) pairs of triples whose head is `e`.
  std::span<const Edge> out_edges(EntityIndex e) const;
  /// (relation, head) pairs of triples whose tail is `e`.
  std::span<const Edge> in_edges(EntityIndex e) const;

  /// New graph holding only the given triples (in the given order), re-indexed
  /// first-seen. Entity metadata, dates and support carry over.
  KnowledgeGraph subgraph(std::span<const std::size_t> triple_indices) const;

 private:
  friend class GraphBuilder;
  void build_indices();

  std::vector<Entity> entities_;
  std::unordered_map<std::string, EntityIndex> entity_lookup_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, RelationIndex> relation_lookup_;
  std::vector<Triple> triples_;
  std::unordered_map<TripleKey, std::size_t, TripleKeyHash> triple_lookup_;

  std::vector<std::size_t> out_offsets_;
  std::vector<Edge> out_edges_;
  std::vector<std::size_t> in_offsets_;
  std::vector<Edge> in_edges_;
};

/// Single-writer incremental construction of a KnowledgeGraph.
class GraphBuilder {
 public:
  EntityIndex add_entity(const Entity& e);
  RelationIndex add_relation(std::string_view predicate);

  /// Inserts or merges. Merging keeps the earlier date and adds `support`.
  void add_triple(const Entity& head, std::string_view predicate, const Entity& tail, Date date,
                  std::uint32_t support = 1);

  /// Validates a Predication and adds it. Returns an error message on rejection.
  std::optional<std::string> add(const Predication& p);

  KnowledgeGraph finish() &&;

 private:
  KnowledgeGraph g_;
};

struct Degree {
  std::uint32_t in = 0;
  std::uint32_t out = 0;

  friend bool operator==(const Degree&, const Degree&) = default;
};

/// Per-entity in/out degree over the deduplicated adjacency. A self-loop
/// counts once in each direction.
std::vector<Degree> degree_centrality(const KnowledgeGraph& g);

/// Graph dump: `head_cui \t predicate \t tail_cui \t YYYY-MM-DD`, one triple per line.
void write_graph_tsv(std::ostream& out, const KnowledgeGraph& g);
void write_graph_tsv(std::ostream& out, const KnowledgeGraph& g, std::span<const Triple> triples);

/// Reads a graph dump. `names`, when given, supplies entity name/semtype by CUI.
/// Throws ParseError naming the offending line.
KnowledgeGraph read_graph_tsv(std::istream& in, const std::vector<Entity>* names = nullptr);

/// Entity table: header `cui \t name \t semtype`, then one entity per line in index order.
void write_entities_tsv(std::ostream& out, const KnowledgeGraph& g);
std::vector<Entity> read_entities_tsv(std::istream& in);

KnowledgeGraph load_graph(const std::string& graph_path, const std::string& entities_path = {});

}  // namespace kgr
