#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kgr/checkpoint.hpp"
#include "kgr/cli.hpp"
#include "kgr/error.hpp"
#include "kgr/eval.hpp"
#include "kgr/filter.hpp"
#include "kgr/ingest.hpp"
#include "kgr/predict.hpp"
#include "kgr/synth.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> matrix(std::span<const double> data, std::size_t rows, std::size_t cols) {
  py::array_t<double> a({rows, cols});
  std::copy(data.begin(), data.end(), a.mutable_data());
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Knowledge-graph construction, embedding and candidate ranking";

  py::register_exception<kgr::Error>(m, "KgrError", PyExc_RuntimeError);

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = kgr::run_subcommand(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a kgr subcommand; returns (exit_code, stdout, stderr).");

  m.def(
      "score",
      [](const std::string& model, std::vector<double> h, std::vector<double> r,
         std::vector<double> t) {
        if (h.size() != r.size() || h.size() != t.size()) {
          throw kgr::ValidationError("score: vectors differ in length");
        }
        return kgr::score_vectors(kgr::parse_model(model), h, r, t);
      },
      py::arg("model"), py::arg("h"), py::arg("r"), py::arg("t"));

  m.def(
      "g2",
      [](std::uint64_t o11, std::uint64_t o12, std::uint64_t o21, std::uint64_t o22) {
        return kgr::g2({o11, o12, o21, o22});
      },
      py::arg("o11"), py::arg("o12"), py::arg("o21"), py::arg("o22"));

  m.def(
      "metrics",
      [](const std::vector<double>& ranks) {
        const auto r = kgr::metrics(ranks);
        py::dict d;
        d["mr"] = r.mr;
        d["mrr"] = r.mrr;
        d["hits1"] = r.hits1;
        d["hits3"] = r.hits3;
        d["hits10"] = r.hits10;
        d["n_queries"] = r.n_queries;
        return d;
      },
      py::arg("ranks"));

  m.def(
      "parse_scores",
      [](const std::string& path) {
        const auto table = kgr::parse_scores(path);
        py::dict scores;
        for (const auto& [k, v] : table.scores) {
          scores[py::make_tuple(k.subject_cui, k.predicate, k.object_cui, k.pmid)] = v;
        }
        return py::make_tuple(scores, table.duplicate_warnings);
      },
      py::arg("path"), "Returns ({(subject, predicate, object, pmid): score}, duplicate_warnings).");

  m.def(
      "read_predications",
      [](const std::string& path, bool strict) {
        const auto f =
            kgr::parse_predications(path, strict ? kgr::ParseMode::Strict : kgr::ParseMode::Lenient);
        py::list rows;
        for (const auto& p : f.records) {
          py::dict d;
          d["subject_cui"] = p.subject.cui;
          d["predicate"] = p.predicate;
          d["object_cui"] = p.object.cui;
          d["pmid"] = p.pmid;
          d["sentence"] = p.sentence;
          d["pub_date"] = p.pub_date.str();
          rows.append(d);
        }
        return py::make_tuple(rows, f.skipped);
      },
      py::arg("path"), py::arg("strict") = false);

  m.def(
      "load_checkpoint",
      [](const std::string& path) {
        const auto c = kgr::load_checkpoint(path);
        const auto& s = c.store;
        py::dict d;
        d["model"] = std::string(kgr::model_name(s.model()));
        d["dim"] = s.dim();
        d["entity_keys"] = c.entity_keys;
        d["relation_keys"] = c.relation_keys;
        d["entities"] = matrix(s.entity_data(), s.entity_count(), s.width());
        d["relations"] = matrix(s.relation_data(), s.relation_count(), s.width());
        return d;
      },
      py::arg("path"));

  m.def(
      "write_demo_corpus",
      [](const std::string& dir, std::uint64_t seed, std::size_t size) {
        kgr::synth::write_demo_corpus(kgr::synth::make_demo_corpus(seed, size), dir);
      },
      py::arg("dir"), py::arg("seed") = 42, py::arg("size") = 4000);

  m.def("relation_presets", &kgr::relation_presets, py::arg("category"));
}
