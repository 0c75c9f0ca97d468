#include "kgr/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "kgr/error.hpp"
#include "kgr/tsv.hpp"

namespace kgr {

Checkpoint make_checkpoint(const EmbeddingStore& store, const KnowledgeGraph& g) {
  if (store.entity_count() != g.entity_count() || store.relation_count() != g.relation_count()) {
    throw ValidationError("checkpoint: store shape does not match the graph");
  }
  Checkpoint c{store, {}, {}};
  for (const auto& e : g.entities()) c.entity_keys.push_back(e.cui);
  for (const auto& r : g.relations()) c.relation_keys.push_back(r);
  return c;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& s = ckpt.store;
  out << "kgr-embeddings\tv1\n"
      << "model\t" << model_name(s.model()) << '\n'
      << "dim\t" << s.dim() << '\n'
      << "entity_count\t" << s.entity_count() << '\n'
      << "relation_count\t" << s.relation_count() << '\n';
  for (std::size_t i = 0; i < s.entity_count(); ++i) {
    out << "E\t" << ckpt.entity_keys.at(i);
    for (double v : s.entity(static_cast<EntityIndex>(i))) out << '\t' << tsv::format_double(v);
    out << '\n';
  }
  for (std::size_t i = 0; i < s.relation_count(); ++i) {
    out << "R\t" << ckpt.relation_keys.at(i);
    for (double v : s.relation(static_cast<RelationIndex>(i))) {
      out << '\t' << tsv::format_double(v);
    }
    out << '\n';
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto header = [&](std::string_view key) {
    if (!tsv::next_line(in, line, line_no)) {
      throw ParseError("checkpoint: truncated header, expected '" + std::string(key) + "'");
    }
    auto f = tsv::split(line);
    if (f.size() != 2 || f[0] != key) {
      throw ParseError("checkpoint line " + std::to_string(line_no) + ": expected '" +
                       std::string(key) + "'");
    }
    return std::string(f[1]);
  };
  if (header("kgr-embeddings") != "v1") throw ParseError("checkpoint: unsupported version");
  const Model model = parse_model(header("model"));
  auto count = [&](std::string_view key) {
    auto v = tsv::parse_int(header(key));
    if (!v || *v < 0) throw ParseError("checkpoint: bad " + std::string(key));
    return static_cast<std::size_t>(*v);
  };
  const auto dim = count("dim");
  const auto n_ent = count("entity_count");
  const auto n_rel = count("relation_count");
  if (dim == 0) throw ParseError("checkpoint: dim must be positive");

  Checkpoint c{EmbeddingStore(model, dim, n_ent, n_rel), {}, {}};
  const std::size_t width = c.store.width();
  auto read_rows = [&](std::string_view tag, std::size_t n, auto row_of,
                       std::vector<std::string>& keys) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!tsv::next_line(in, line, line_no)) throw ParseError("checkpoint: truncated rows");
      auto f = tsv::split(line);
      if (f.size() != width + 2 || f[0] != tag || f[1].empty()) {
        throw ParseError("checkpoint line " + std::to_string(line_no) + ": malformed " +
                         std::string(tag) + " row");
      }
      keys.emplace_back(f[1]);
      auto row = row_of(i);
      for (std::size_t j = 0; j < width; ++j) {
        auto v = tsv::parse_double(f[j + 2]);
        if (!v) throw ParseError("checkpoint line " + std::to_string(line_no) + ": bad value");
        row[j] = *v;
      }
    }
  };
  read_rows("E", n_ent, [&](std::size_t i) { return c.store.entity(static_cast<EntityIndex>(i)); },
            c.entity_keys);
  read_rows("R", n_rel,
            [&](std::size_t i) { return c.store.relation(static_cast<RelationIndex>(i)); },
            c.relation_keys);
  while (tsv::next_line(in, line, line_no)) {
    if (!line.empty()) throw ParseError("checkpoint: trailing data at line " + std::to_string(line_no));
  }
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write checkpoint: " + path);
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path);
  return read_checkpoint(in);
}

EmbeddingStore align_to_graph(const Checkpoint& ckpt, const KnowledgeGraph& g) {
  const auto& src = ckpt.store;
  EmbeddingStore out(src.model(), src.dim(), g.entity_count(), g.relation_count());
  std::unordered_map<std::string_view, std::size_t> ent, rel;
  for (std::size_t i = 0; i < ckpt.entity_keys.size(); ++i) ent.emplace(ckpt.entity_keys[i], i);
  for (std::size_t i = 0; i < ckpt.relation_keys.size(); ++i) rel.emplace(ckpt.relation_keys[i], i);
  for (EntityIndex e = 0; e < g.entity_count(); ++e) {
    auto it = ent.find(g.entity(e).cui);
    if (it == ent.end()) throw ValidationError("checkpoint has no entity " + g.entity(e).cui);
    auto row = src.entity(static_cast<EntityIndex>(it->second));
    std::copy(row.begin(), row.end(), out.entity(e).begin());
  }
  for (RelationIndex r = 0; r < g.relation_count(); ++r) {
    auto it = rel.find(g.relation(r));
    if (it == rel.end()) throw ValidationError("checkpoint has no relation " + g.relation(r));
    auto row = src.relation(static_cast<RelationIndex>(it->second));
    std::copy(row.begin(), row.end(), out.relation(r).begin());
  }
  return out;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace kgr
