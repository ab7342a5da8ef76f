// Python bindings. Treebanks cross the boundary as text (bracketed or
// CoNLL-U); grammars stay as opaque handles.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sitekit/sitekit.hpp"

namespace py = pybind11;
using namespace sitekit;

namespace {

Corpus load(const std::string& text, const std::string& format, bool preterminalize, bool labeled) {
  LoadOptions opts;
  opts.format = parse_format(format);
  opts.preterminalize = preterminalize;
  opts.conversion.labeled = labeled;
  return load_corpus_text(text, "<python>", opts).corpus;
}

py::dict rate_dict(const RateReport& r) {
  py::dict d;
  d["entropy"] = r.entropy;
  d["mlu"] = r.mlu;
  d["rate"] = r.rate;
  d["spectral_radius"] = r.spectral_radius;
  return d;
}

py::dict coefficient_dict(const Coefficient& c) {
  py::dict d;
  d["estimate"] = c.estimate;
  d["stderr"] = c.stderr_;
  d["t"] = c.t;
  d["p"] = c.p;
  return d;
}

FreqTable table(const std::vector<std::uint64_t>& counts) { return FreqTable(counts); }

}  // namespace

PYBIND11_MODULE(_sitekit, m) {
  m.doc() = "PCFG induction, derivational entropy and entropy estimators";

  auto base = py::register_exception<Error>(m, "SitekitError", PyExc_RuntimeError);
  auto input = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", input.ptr());
  py::register_exception<StructuralError>(m, "StructuralError", input.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<DivergenceError>(m, "DivergenceError", numerical.ptr());
  (void)base;

  py::class_<Pcfg>(m, "Grammar")
      .def_property_readonly("root", &Pcfg::root_label)
      .def_property_readonly("nonterminals", &Pcfg::nonterminals)
      .def_property_readonly("terminals", &Pcfg::terminals)
      .def_property_readonly("rules",
                             [](const Pcfg& g) {
                               py::list out;
                               for (const Rule& r : g.rules()) {
                                 py::list rhs;
                                 for (const SymbolRef& s : r.rhs) rhs.append(g.label(s));
                                 out.append(py::make_tuple(g.nonterminals()[r.lhs], rhs, r.prob, r.freq));
                               }
                               return out;
                             })
      .def("to_text", [](const Pcfg& g) { return write_grammar(g); })
      .def("__len__", [](const Pcfg& g) { return g.rules().size(); })
      .def("__repr__", [](const Pcfg& g) {
        return "<Grammar root=" + g.root_label() + " nonterminals=" + std::to_string(g.nonterminals().size()) +
               " rules=" + std::to_string(g.rules().size()) + ">";
      });

  m.def(
      "induce",
      [](const std::string& text, const std::string& format, bool preterminalize, bool labeled) {
        return induce(load(text, format, preterminalize, labeled));
      },
      py::arg("text"), py::arg("format") = "ptb", py::arg("preterminalize") = true, py::arg("labeled") = true,
      "ML grammar of a treebank given as text.");
  m.def(
      "from_rules",
      [](const std::string& root, const std::vector<std::tuple<std::string, std::vector<std::string>, double>>& rules) {
        std::vector<Pcfg::RuleSpec> specs;
        for (const auto& [lhs, rhs, p] : rules) specs.push_back({lhs, rhs, p, 0});
        return Pcfg::from_rules(root, specs);
      },
      py::arg("root"), py::arg("rules"), "Grammar from (lhs, rhs, probability) triples.");
  m.def("read_grammar", &read_grammar, py::arg("text"));

  m.def("derivational_entropy", &derivational_entropy, py::arg("grammar"), "Exact entropy in bits.");
  m.def("grammar_mlu", &grammar_mlu, py::arg("grammar"));
  m.def("entropy_rate", [](const Pcfg& g) { return rate_dict(entropy_rate(g)); }, py::arg("grammar"));
  m.def(
      "local_entropies",
      [](const Pcfg& g) {
        const auto h = local_entropies(g);
        return std::vector<double>(h.data(), h.data() + h.size());
      },
      py::arg("grammar"));
  m.def(
      "nonterminal_entropies",
      [](const Pcfg& g) {
        const auto h = derivational_entropies(g);
        return std::vector<double>(h.data(), h.data() + h.size());
      },
      py::arg("grammar"));

  m.def("ml_entropy", [](const std::vector<std::uint64_t>& c) { return ml_entropy(table(c)); }, py::arg("counts"));
  m.def("cae_entropy", [](const std::vector<std::uint64_t>& c) { return cae_entropy(table(c)); }, py::arg("counts"));
  m.def("cwj_entropy", [](const std::vector<std::uint64_t>& c) { return cwj_entropy(table(c)); }, py::arg("counts"));
  m.def(
      "site",
      [](const Pcfg& g, const std::string& smoother) { return site(g, parse_smoother(smoother)); },
      py::arg("grammar"), py::arg("smoother") = "cwj", "SITE estimate from an ML-induced grammar, in bits.");

  m.def(
      "sample",
      [](const Pcfg& g, std::size_t n, std::uint64_t seed) {
        std::vector<std::string> out;
        for (const Tree& t : sample_corpus(g, n, seed).sentences) out.push_back(to_bracketed(t));
        return out;
      },
      py::arg("grammar"), py::arg("n"), py::arg("seed") = 1, "Bracketed trees drawn from the grammar.");

  m.def(
      "convert",
      [](const std::string& conllu, bool labeled) {
        ConversionConfig cfg;
        cfg.labeled = labeled;
        const auto report = convert_treebank(parse_conllu(conllu), cfg);
        std::vector<std::string> trees;
        for (const Tree& t : report.corpus.sentences) trees.push_back(to_bracketed(t));
        return py::make_tuple(trees, report.skipped_ids);
      },
      py::arg("conllu"), py::arg("labeled") = true,
      "Constituency trees of the projective sentences, plus ids of the skipped ones.");

  m.def(
      "converge",
      [](const Pcfg& g, std::vector<std::size_t> sizes, std::size_t replications, std::uint64_t seed,
         std::vector<std::string> estimators, std::size_t threads) {
        ConvergenceConfig cfg;
        if (!sizes.empty()) cfg.sizes = std::move(sizes);
        cfg.replications = replications;
        cfg.seed = seed;
        cfg.threads = threads;
        if (!estimators.empty()) {
          cfg.estimators.clear();
          for (const auto& e : estimators) cfg.estimators.push_back(parse_method(e));
        }
        ConvergenceResult r;
        {
          py::gil_scoped_release release;
          r = converge(g, cfg);
        }
        py::list rows;
        for (const auto& row : r.rows) {
          py::dict d;
          d["sample_size"] = row.sample_size;
          d["estimator"] = row.estimator;
          d["mean"] = row.mean;
          d["ci95_low"] = row.ci95_low;
          d["ci95_high"] = row.ci95_high;
          d["replications"] = row.replications;
          rows.append(d);
        }
        py::dict out;
        out["true_entropy"] = r.true_entropy;
        out["rows"] = rows;
        return out;
      },
      py::arg("grammar"), py::arg("sizes") = std::vector<std::size_t>{}, py::arg("replications") = 100,
      py::arg("seed") = 1, py::arg("estimators") = std::vector<std::string>{}, py::arg("threads") = 0);

  m.def(
      "fit",
      [](const std::vector<double>& x, const std::vector<double>& y, bool intercept) {
        const RegressionFit f = fit(x, y, intercept);
        py::dict d;
        d["slope"] = coefficient_dict(f.slope);
        d["intercept"] = f.intercept ? py::object(coefficient_dict(*f.intercept)) : py::none();
        d["r"] = f.r;
        d["n"] = f.n;
        d["df"] = f.df;
        return d;
      },
      py::arg("x"), py::arg("y"), py::arg("intercept") = true, "Ordinary least squares of y on x.");
  m.def(
      "residualize", [](const std::vector<double>& y, const std::vector<double>& log_n) { return residualize(y, log_n); },
      py::arg("y"), py::arg("log_n"));
}
