#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kgr/embed.hpp"
#include "kgr/graph.hpp"

namespace kgr {

/// Embeddings keyed by CUI (entities) and predicate (relations).
struct Checkpoint {
  EmbeddingStore store;
  std::vector<std::string> entity_keys;
  std::vector<std::string> relation_keys;
};

Checkpoint make_checkpoint(const EmbeddingStore& store, const KnowledgeGraph& g);

/// Text checkpoint:
///
///   kgr-embeddings  v1
///   model           <name>
///   dim             <d>
///   entity_count    <n>
///   relation_count  <m>
///   E  <cui>        <width values>     (n lines)
///   R  <predicate>  <width values>     (m lines)
///
/// Fields are tab-separated; values use shortest round-trip formatting, so a
/// reload reproduces every double exactly.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Reorders rows to `g`'s dense indices. Throws when `g` has an entity or
/// relation the checkpoint lacks.
EmbeddingStore align_to_graph(const Checkpoint& ckpt, const KnowledgeGraph& g);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

}  // namespace kgr
