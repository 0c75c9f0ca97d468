#pragma once

#include <string>
#include <vector>

#include "kgr/graph.hpp"

namespace testutil {

inline kgr::Entity ent(const std::string& cui, const std::string& semtype = "gngm") {
  return {cui, cui + " name", semtype};
}

inline kgr::Predication pred(const std::string& s, const std::string& p, const std::string& o,
                             const std::string& date = "2015-01-01",
                             const std::string& pmid = "1") {
  return {ent(s), p, ent(o), pmid, "", *kgr::Date::parse(date), std::nullopt};
}

inline kgr::KnowledgeGraph graph_of(const std::vector<kgr::Predication>& preds) {
  return kgr::KnowledgeGraph::build(preds);
}

}  // namespace testutil
