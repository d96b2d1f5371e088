#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "mbse/amr.hpp"
#include "mbse/bleu.hpp"
#include "mbse/ensemble.hpp"
#include "mbse/pipeline.hpp"
#include "mbse/smatch.hpp"

namespace py = pybind11;
using namespace mbse;

namespace {

TransformMode transform_mode(const std::string& name) {
  if (name == "unlabeled") return TransformMode::Unlabeled;
  if (name == "nowsd") return TransformMode::NoWsd;
  throw std::invalid_argument("unknown transform mode: " + name);
}

Method method_arg(const std::string& name) {
  const std::optional<Method> m = method_from_name(name);
  if (!m) throw std::invalid_argument("unknown method: " + name);
  return *m;
}

}  // namespace

PYBIND11_MODULE(_mbse, m) {
  m.doc() = "Smatch scoring, ensemble selection and silver-data distillation for AMR graphs";

  py::register_exception<ParseError>(m, "PenmanParseError", PyExc_ValueError);
  py::register_exception<GraphError>(m, "GraphInvariantError", PyExc_ValueError);

  py::class_<AttrValue>(m, "AttrValue")
      .def(py::init<>())
      .def(py::init([](std::string text, bool quoted) {
             return AttrValue{std::move(text), quoted};
           }),
           py::arg("text"), py::arg("quoted") = false)
      .def_readwrite("text", &AttrValue::text)
      .def_readwrite("quoted", &AttrValue::quoted)
      .def("__repr__", [](const AttrValue& v) {
        return v.quoted ? "AttrValue(\"" + v.text + "\", quoted=True)" : "AttrValue(" + v.text + ")";
      });

  py::class_<Edge>(m, "Edge")
      .def_readonly("source", &Edge::source)
      .def_readonly("role", &Edge::role)
      .def_readonly("target", &Edge::target);

  py::class_<Attribute>(m, "Attribute")
      .def_readonly("source", &Attribute::source)
      .def_readonly("role", &Attribute::role)
      .def_readonly("value", &Attribute::value);

  py::class_<AmrGraph>(m, "AmrGraph")
      .def(py::init<>())
      .def("set_root", &AmrGraph::set_root)
      .def("add_node", &AmrGraph::add_node, py::arg("var"), py::arg("concept"))
      .def("add_edge", &AmrGraph::add_edge, py::arg("source"), py::arg("role"), py::arg("target"))
      .def(
          "add_attribute",
          [](AmrGraph& g, const std::string& source, const std::string& role, const std::string& text,
             bool quoted) { return g.add_attribute(source, role, AttrValue{text, quoted}); },
          py::arg("source"), py::arg("role"), py::arg("text"), py::arg("quoted") = false)
      .def("set_metadata", &AmrGraph::set_metadata)
      .def_property_readonly("root", &AmrGraph::root)
      .def_property_readonly("nodes", &AmrGraph::nodes)
      .def_property_readonly("edges", &AmrGraph::edges)
      .def_property_readonly("attributes", &AmrGraph::attributes)
      .def_property_readonly("metadata", &AmrGraph::metadata)
      .def("metadata_value",
           [](const AmrGraph& g, const std::string& key) -> std::optional<std::string> {
             const std::string* v = g.metadata_value(key);
             if (!v) return std::nullopt;
             return *v;
           })
      .def_property_readonly("id", &AmrGraph::id)
      .def("check", &AmrGraph::check)
      .def("__repr__", [](const AmrGraph& g) {
        return "AmrGraph(root=" + g.root() + ", nodes=" + std::to_string(g.nodes().size()) + ")";
      });

  m.def("parse_penman", [](const std::string& text) { return parse_penman(text); }, py::arg("text"));
  m.def("serialize_penman", &serialize_penman, py::arg("graph"));
  m.def("write_record", &write_record, py::arg("graph"));
  m.def(
      "extract_triples",
      [](const AmrGraph& g) {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const Triple& t : extract_triples(g)) out.emplace_back(t.rel, t.arg1, t.arg2);
        return out;
      },
      py::arg("graph"), "Triples as (rel, arg1, arg2); instance and TOP use those rel labels.");

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("well_formed", &ValidationReport::well_formed)
      .def_readonly("connected", &ValidationReport::connected)
      .def_readonly("issues", &ValidationReport::issues);
  m.def("validate", &validate, py::arg("graph"));

  py::class_<SearchConfig>(m, "SearchConfig")
      .def(py::init([](int restarts, std::uint64_t seed, int max_iterations, bool random_init) {
             SearchConfig cfg;
             cfg.restarts = restarts;
             cfg.seed = seed;
             cfg.max_iterations = max_iterations;
             cfg.random_init = random_init;
             return cfg;
           }),
           py::arg("restarts") = 4, py::arg("seed") = 0, py::arg("max_iterations") = 1000,
           py::arg("random_init") = false)
      .def_readwrite("restarts", &SearchConfig::restarts)
      .def_readwrite("seed", &SearchConfig::seed)
      .def_readwrite("max_iterations", &SearchConfig::max_iterations)
      .def_readwrite("random_init", &SearchConfig::random_init);

  py::class_<SmatchScore>(m, "SmatchScore")
      .def_readonly("matched", &SmatchScore::matched)
      .def_readonly("total_pred", &SmatchScore::total_pred)
      .def_readonly("total_gold", &SmatchScore::total_gold)
      .def_property_readonly("precision", &SmatchScore::precision)
      .def_property_readonly("recall", &SmatchScore::recall)
      .def_property_readonly("f1", &SmatchScore::f1)
      .def("__repr__", [](const SmatchScore& s) {
        return "SmatchScore(matched=" + std::to_string(s.matched) + ", f1=" + std::to_string(s.f1()) +
               ")";
      });

  m.def(
      "smatch_pair",
      [](const AmrGraph& pred, const AmrGraph& gold, const SearchConfig& cfg) {
        const PairResult r = smatch_pair(pred, gold, cfg);
        return py::make_tuple(r.score, r.alignment.pairs(pred, gold));
      },
      py::arg("pred"), py::arg("gold"), py::arg("config") = SearchConfig{},
      "Hill-climbing Smatch; returns (score, variable alignment pairs).");
  m.def("exact_smatch", &exact_smatch, py::arg("pred"), py::arg("gold"), py::arg("var_limit") = 8);
  m.def("corpus_smatch", &corpus_smatch, py::arg("pred"), py::arg("gold"),
        py::arg("config") = SearchConfig{}, py::arg("jobs") = 1);
  m.def(
      "transform",
      [](const AmrGraph& g, const std::string& mode) { return transform(g, transform_mode(mode)); },
      py::arg("graph"), py::arg("mode"), "mode: 'unlabeled' or 'nowsd'");

  py::class_<Candidate>(m, "Candidate")
      .def(py::init([](std::string source, AmrGraph graph) {
             return Candidate{std::move(source), std::move(graph)};
           }),
           py::arg("source_parser_id"), py::arg("graph"))
      .def_readonly("source_parser_id", &Candidate::source_parser_id)
      .def_readonly("graph", &Candidate::graph);

  py::class_<CandidateSet>(m, "CandidateSet")
      .def(py::init([](std::string sentence_id, std::vector<Candidate> candidates) {
             return CandidateSet{std::move(sentence_id), std::move(candidates)};
           }),
           py::arg("sentence_id"), py::arg("candidates"))
      .def_readonly("sentence_id", &CandidateSet::sentence_id)
      .def_readonly("candidates", &CandidateSet::candidates);

  py::class_<PairwiseMatrix>(m, "PairwiseMatrix")
      .def(py::init<std::size_t>(), py::arg("n"))
      .def_static("from_rows", &PairwiseMatrix::from_rows, py::arg("rows"))
      .def("at", &PairwiseMatrix::at)
      .def("set", &PairwiseMatrix::set)
      .def("__len__", &PairwiseMatrix::size)
      .def("rows", [](const PairwiseMatrix& m) {
        std::vector<std::vector<double>> rows(m.size(), std::vector<double>(m.size()));
        for (std::size_t i = 0; i < m.size(); ++i) {
          for (std::size_t j = 0; j < m.size(); ++j) rows[i][j] = m.at(i, j);
        }
        return rows;
      });

  py::class_<EnsembleDecision>(m, "EnsembleDecision")
      .def_readonly("sentence_id", &EnsembleDecision::sentence_id)
      .def_property_readonly("method",
                             [](const EnsembleDecision& d) { return method_name(d.method); })
      .def_readonly("chosen_index", &EnsembleDecision::chosen_index)
      .def_readonly("chosen_source", &EnsembleDecision::chosen_source)
      .def_readonly("matrix", &EnsembleDecision::matrix)
      .def_readonly("max_pair_score", &EnsembleDecision::max_pair_score)
      .def_readonly("tie", &EnsembleDecision::tie)
      .def_readonly("discarded_by_threshold", &EnsembleDecision::discarded_by_threshold)
      .def("__repr__", [](const EnsembleDecision& d) {
        return "EnsembleDecision(" + d.sentence_id + ", chosen=" +
               (d.chosen_index ? std::to_string(*d.chosen_index) : "none") + ")";
      });

  m.def("pairwise_matrix", &pairwise_matrix, py::arg("candidates"),
        py::arg("config") = SearchConfig{});
  m.def("greedy_select", &greedy_select, py::arg("candidates"), py::arg("matrix"),
        py::arg("theta") = std::nullopt);
  m.def("average_select", &average_select, py::arg("candidates"), py::arg("matrix"));
  m.def("majority_select", &majority_select, py::arg("candidates"),
        py::arg("config") = SearchConfig{});
  m.def(
      "run_selection",
      [](const CandidateSet& cands, const std::string& method, std::optional<double> theta,
         const SearchConfig& cfg) { return run_selection(cands, method_arg(method), theta, cfg); },
      py::arg("candidates"), py::arg("method"), py::arg("theta") = std::nullopt,
      py::arg("config") = SearchConfig{});

  m.def(
      "sentence_bleu",
      [](const std::string& reference, const std::string& hypothesis, const std::string& smoothing) {
        return sentence_bleu(reference, hypothesis,
                             smoothing == "none" ? BleuSmoothing::None : BleuSmoothing::AddOne);
      },
      py::arg("reference"), py::arg("hypothesis"), py::arg("smoothing") = "add-one");
  m.def("bleu_tokenize", &bleu_tokenize, py::arg("text"));

  py::class_<DroppedRecord>(m, "DroppedRecord")
      .def_readonly("index", &DroppedRecord::index)
      .def_readonly("id", &DroppedRecord::id)
      .def_readonly("reason", &DroppedRecord::reason);

  py::class_<CorpusReadResult>(m, "CorpusReadResult")
      .def_readonly("records", &CorpusReadResult::records)
      .def_readonly("dropped", &CorpusReadResult::dropped)
      .def_readonly("raw_records", &CorpusReadResult::raw_records);

  m.def("read_corpus_file", &read_corpus_file, py::arg("path"));
  m.def("read_corpus_text",
        [](const std::string& text) { return read_corpus_text(text); }, py::arg("text"));
  m.def("write_corpus_file", &write_corpus_file, py::arg("path"), py::arg("records"));

  py::class_<SilverRecord>(m, "SilverRecord")
      .def_readonly("sentence_id", &SilverRecord::sentence_id)
      .def_readonly("sentence_text", &SilverRecord::sentence_text)
      .def_readonly("graph", &SilverRecord::graph)
      .def_readonly("source_parser_id", &SilverRecord::source_parser_id)
      .def_readonly("max_pair_score", &SilverRecord::max_pair_score);

  py::class_<SelectionStats>(m, "SelectionStats")
      .def_readonly("selected_by_parser", &SelectionStats::selected_by_parser)
      .def_readonly("discarded", &SelectionStats::discarded)
      .def_readonly("dropped", &SelectionStats::dropped)
      .def_readonly("total", &SelectionStats::total)
      .def_readonly("dropped_ids", &SelectionStats::dropped_ids)
      .def_property_readonly("selected_total", &SelectionStats::selected_total);

  py::class_<AlignResult>(m, "AlignResult")
      .def_readonly("sets", &AlignResult::sets)
      .def_readonly("parser_ids", &AlignResult::parser_ids)
      .def_readonly("total_sentences", &AlignResult::total_sentences)
      .def_readonly("dropped", &AlignResult::dropped)
      .def_readonly("dropped_ids", &AlignResult::dropped_ids);

  m.def("align_parser_outputs", &align_parser_outputs, py::arg("files"),
        py::arg("parser_ids") = std::vector<std::string>{});

  m.def(
      "distill",
      [](const std::vector<CandidateSet>& cands, const std::string& method,
         std::optional<double> theta, const SearchConfig& cfg, int jobs) {
        DistillOptions opts;
        opts.method = method_arg(method);
        opts.theta = theta;
        opts.search = cfg;
        opts.jobs = jobs;
        const DistillResult result = distill(cands, opts);
        return py::make_tuple(result.records, result.stats, result.decisions);
      },
      py::arg("candidate_sets"), py::arg("method") = "greedy", py::arg("theta") = std::nullopt,
      py::arg("config") = SearchConfig{}, py::arg("jobs") = 1,
      "Returns (silver_records, stats, decisions).");

  m.def("silver_to_record", &silver_to_record, py::arg("record"));
  m.def("silver_corpus_to_text", &silver_corpus_to_text, py::arg("records"));
}
