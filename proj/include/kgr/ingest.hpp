#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgr/graph.hpp"

namespace kgr {

enum class ParseMode { Lenient, Strict };

/// Columns of the predication TSV, in canonical order. An optional trailing
/// `confidence` column is also understood.
inline constexpr std::array<std::string_view, 10> kPredicationColumns = {
    "subject_cui", "subject_name", "subject_semtype", "predicate", "object_cui",
    "object_name", "object_semtype", "pmid", "sentence", "pub_date"};

struct PredicationFile {
  std::vector<Predication> records;
  std::size_t skipped = 0;
  std::vector<std::string> diagnostics;
};

/// Reads a predication TSV. Columns are located by header name; extra columns
/// are ignored. Lenient mode skips and reports bad lines, strict mode throws
/// on the first one. A missing required column always throws.
PredicationFile parse_predications(const std::string& path, ParseMode mode = ParseMode::Lenient);
PredicationFile read_predications(std::istream& in, ParseMode mode = ParseMode::Lenient,
                                  std::string_view source = "<stream>");

/// Writes the canonical header and records. The confidence column is emitted
/// only when at least one record carries a confidence.
void write_predications(std::ostream& out, std::span<const Predication> records);

struct SemTypeRuleSet {
  std::set<std::string> excluded_types;
};

struct Whitelist {
  std::set<std::string> protected_cuis;

  bool contains(std::string_view cui) const {
    return protected_cuis.find(std::string(cui)) != protected_cuis.end();
  }
};

struct CandidateSet {
  std::string label;
  std::set<std::string> cuis;
};

/// One identifier per line; only the first tab/space separated token counts.
/// `#` starts a comment. Blank lines are ignored and duplicates collapse.
std::set<std::string> parse_id_list(const std::string& path);
std::set<std::string> read_id_list(std::istream& in);

SemTypeRuleSet parse_semtypes(const std::string& path);

/// `require_nonempty` is the disease-mode switch: an effectively empty file is an error.
Whitelist parse_whitelist(const std::string& path, bool require_nonempty = true);

CandidateSet parse_candidates(const std::string& path, std::string label);

/// Key of an externally supplied confidence score.
struct ScoreKey {
  std::string subject_cui;
  std::string predicate;
  std::string object_cui;
  std::string pmid;

  friend auto operator<=>(const ScoreKey&, const ScoreKey&) = default;
  friend bool operator==(const ScoreKey&, const ScoreKey&) = default;
};

inline ScoreKey score_key(const Predication& p) {
  return {p.subject.cui, p.predicate, p.object.cui, p.pmid};
}

struct ScoreTable {
  std::map<ScoreKey, double> scores;
  std::size_t duplicate_warnings = 0;
};

/// Score TSV `subject_cui predicate object_cui pmid score` (header optional).
/// Later duplicates overwrite earlier ones and are counted. Scores outside
/// [0,1] throw.
ScoreTable parse_scores(const std::string& path);
ScoreTable read_scores(std::istream& in, std::string_view source = "<stream>");
void write_scores(std::ostream& out, const ScoreTable& table);

}  // namespace kgr
