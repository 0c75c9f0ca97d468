#include "kgr/ingest.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "kgr/error.hpp"
#include "kgr/tsv.hpp"

namespace kgr {
namespace {

std::ifstream open_or_throw(const std::string& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + std::string(what) + ": " + path);
  return in;
}

std::string line_prefix(std::string_view source, std::size_t line_no) {
  return std::string(source) + ":" + std::to_string(line_no) + ": ";
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

PredicationFile read_predications(std::istream& in, ParseMode mode, std::string_view source) {
  PredicationFile result;
  std::string line;
  std::size_t line_no = 0;
  if (!tsv::next_line(in, line, line_no)) {
    throw ParseError(std::string(source) + ": empty file, expected header");
  }
  // Tolerate a UTF-8 byte order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = tsv::split(line);
  std::array<std::size_t, kPredicationColumns.size()> col{};
  for (std::size_t c = 0; c < kPredicationColumns.size(); ++c) {
    bool found = false;
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (header[h] == kPredicationColumns[c]) {
        col[c] = h;
        found = true;
        break;
      }
    }
    if (!found) {
      throw ParseError(std::string(source) + ": missing column '" +
                       std::string(kPredicationColumns[c]) + "'");
    }
  }
  std::optional<std::size_t> confidence_col;
  for (std::size_t h = 0; h < header.size(); ++h) {
    if (header[h] == "confidence") confidence_col = h;
  }

  auto reject = [&](const std::string& why) {
    auto msg = line_prefix(source, line_no) + why;
    if (mode == ParseMode::Strict) throw ParseError(msg);
    ++result.skipped;
    result.diagnostics.push_back(std::move(msg));
  };

  while (tsv::next_line(in, line, line_no)) {
    if (line.empty()) continue;
    const auto f = tsv::split(line);
    if (f.size() != header.size()) {
      reject("expected " + std::to_string(header.size()) + " fields, got " +
             std::to_string(f.size()));
      continue;
    }
    auto field = [&](std::size_t c) { return std::string(f[col[c]]); };
    Predication p;
    p.subject = Entity{field(0), field(1), field(2)};
    p.predicate = field(3);
    p.object = Entity{field(4), field(5), field(6)};
    p.pmid = field(7);
    p.sentence = field(8);
    if (p.subject.cui.empty() || p.object.cui.empty()) {
      reject("empty CUI");
      continue;
    }
    if (p.predicate.empty()) {
      reject("empty predicate");
      continue;
    }
    auto date = Date::parse(f[col[9]]);
    if (!date) {
      reject("invalid pub_date '" + field(9) + "'");
      continue;
    }
    p.pub_date = *date;
    if (confidence_col && !f[*confidence_col].empty()) {
      auto c = tsv::parse_double(f[*confidence_col]);
      if (!c || !(*c >= 0.0 && *c <= 1.0)) {
        reject("confidence '" + std::string(f[*confidence_col]) + "' not a number in [0,1]");
        continue;
      }
      p.confidence = *c;
    }
    result.records.push_back(std::move(p));
  }
  return result;
}

PredicationFile parse_predications(const std::string& path, ParseMode mode) {
  auto in = open_or_throw(path, "predication file");
  return read_predications(in, mode, path);
}

void write_predications(std::ostream& out, std::span<const Predication> records) {
  bool with_confidence = false;
  for (const auto& p : records) with_confidence = with_confidence || p.confidence.has_value();
  for (std::size_t c = 0; c < kPredicationColumns.size(); ++c) {
    out << (c ? "\t" : "") << kPredicationColumns[c];
  }
  if (with_confidence) out << "\tconfidence";
  out << '\n';
  for (const auto& p : records) {
    out << p.subject.cui << '\t' << p.subject.name << '\t' << p.subject.semtype << '\t'
        << p.predicate << '\t' << p.object.cui << '\t' << p.object.name << '\t'
        << p.object.semtype << '\t' << p.pmid << '\t' << p.sentence << '\t' << p.pub_date.str();
    if (with_confidence) {
      out << '\t';
      if (p.confidence) out << tsv::format_double(*p.confidence);
    }
    out << '\n';
  }
}

std::set<std::string> read_id_list(std::istream& in) {
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (tsv::next_line(in, line, line_no)) {
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    auto tokens = split_ws(view);
    if (!tokens.empty()) ids.emplace(tokens.front());
  }
  return ids;
}

std::set<std::string> parse_id_list(const std::string& path) {
  auto in = open_or_throw(path, "list file");
  return read_id_list(in);
}

SemTypeRuleSet parse_semtypes(const std::string& path) { return {parse_id_list(path)}; }

Whitelist parse_whitelist(const std::string& path, bool require_nonempty) {
  Whitelist w{parse_id_list(path)};
  if (require_nonempty && w.protected_cuis.empty()) {
    throw ValidationError("whitelist " + path + " contains no CUIs");
  }
  return w;
}

CandidateSet parse_candidates(const std::string& path, std::string label) {
  CandidateSet c{std::move(label), parse_id_list(path)};
  if (c.cuis.empty()) throw ValidationError("candidate file " + path + " contains no CUIs");
  return c;
}

ScoreTable read_scores(std::istream& in, std::string_view source) {
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (tsv::next_line(in, line, line_no)) {
    const auto f = split_ws(line);
    if (f.empty()) continue;
    if (first) {
      first = false;
      if (f[0] == "subject_cui") {
        static constexpr std::array<std::string_view, 5> expected = {
            "subject_cui", "predicate", "object_cui", "pmid", "score"};
        if (f.size() != expected.size()) {
          throw ParseError(line_prefix(source, line_no) + "score header must have 5 columns");
        }
        for (std::size_t i = 0; i < expected.size(); ++i) {
          if (f[i] != expected[i]) {
            throw ParseError(line_prefix(source, line_no) + "expected column '" +
                             std::string(expected[i]) + "'");
          }
        }
        continue;
      }
    }
    if (f.size() != 5) {
      throw ParseError(line_prefix(source, line_no) + "expected 5 fields, got " +
                       std::to_string(f.size()));
    }
    auto score = tsv::parse_double(f[4]);
    if (!score) {
      throw ParseError(line_prefix(source, line_no) + "score '" + std::string(f[4]) +
                       "' is not a number");
    }
    if (!(*score >= 0.0 && *score <= 1.0)) {
      throw ValidationError(line_prefix(source, line_no) + "score " + std::string(f[4]) +
                            " outside [0,1]");
    }
    ScoreKey key{std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3])};
    auto [it, inserted] = table.scores.insert_or_assign(std::move(key), *score);
    if (!inserted) ++table.duplicate_warnings;
  }
  return table;
}

ScoreTable parse_scores(const std::string& path) {
  auto in = open_or_throw(path, "score file");
  return read_scores(in, path);
}

void write_scores(std::ostream& out, const ScoreTable& table) {
  out << "subject_cui\tpredicate\tobject_cui\tpmid\tscore\n";
  for (const auto& [k, v] : table.scores) {
    out << k.subject_cui << '\t' << k.predicate << '\t' << k.object_cui << '\t' << k.pmid << '\t'
        << tsv::format_double(v) << '\n';
  }
}

}  // namespace kgr
