// sitekit: treebank entropy toolkit, command-line driver.
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sitekit/sitekit.hpp"

namespace {

using namespace sitekit;
using nlohmann::json;

struct Globals {
  std::string format = "ptb";
  std::uint64_t seed = 1;
  std::string smoother = "cwj";
  bool nats = false;
  std::string output;
  std::string json_path;
  std::size_t threads = 0;
  bool no_preterminalize = false;
  bool strip_function_tags = false;
  bool keep_empty = false;
  std::vector<std::string> drop_labels;
  bool unlabeled = false;
  bool word_forms = false;
};

double unit(const Globals& g, double bits) { return g.nats ? bits * std::numbers::ln2 : bits; }
std::string unit_name(const Globals& g) { return g.nats ? "nats" : "bits"; }

LoadOptions load_options(const Globals& g) {
  LoadOptions o;
  o.format = parse_format(g.format);
  o.preterminalize = !g.no_preterminalize;
  o.strip_function_tags = g.strip_function_tags;
  if (g.keep_empty)
    o.drop_labels.clear();
  else if (!g.drop_labels.empty())
    o.drop_labels = g.drop_labels;
  o.conversion.labeled = !g.unlabeled;
  o.conversion.use_pos = !g.word_forms;
  return o;
}

std::string slurp(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  return read_file(path);
}

LoadedCorpus load(const Globals& g, const std::string& path) {
  LoadedCorpus c = load_corpus_text(slurp(path), path == "-" ? "stdin" : std::filesystem::path(path).filename().string(),
                                    load_options(g));
  if (c.skipped_nonprojective > 0) {
    std::cerr << "sitekit: " << path << ": skipped " << c.skipped_nonprojective << " non-projective sentence(s)";
    for (const auto& id : c.skipped_ids) std::cerr << ' ' << id;
    std::cerr << '\n';
  }
  return c;
}

// All files pooled into one corpus.
Corpus load_pooled(const Globals& g, const std::vector<std::string>& files) {
  if (files.empty()) throw InputError("no input files given");
  Corpus pooled;
  pooled.preterminalized = true;
  for (const auto& f : files) {
    auto c = load(g, f);
    pooled.sentences.insert(pooled.sentences.end(), std::make_move_iterator(c.corpus.sentences.begin()),
                            std::make_move_iterator(c.corpus.sentences.end()));
  }
  pooled.source_id = files.size() == 1 ? files.front() : "pooled";
  if (pooled.empty()) throw InputError("input contains no sentences");
  return pooled;
}

// A grammar either read from --grammar or induced from treebank files.
struct GrammarSource {
  Pcfg grammar;
  std::string source;
  std::optional<Corpus> corpus;
};

GrammarSource grammar_source(const Globals& g, const std::string& grammar_file, const std::vector<std::string>& files) {
  if (!grammar_file.empty()) {
    if (!files.empty()) throw InputError("give either --grammar or treebank files, not both");
    return {read_grammar(slurp(grammar_file)), grammar_file, std::nullopt};
  }
  Corpus c = load_pooled(g, files);
  Pcfg p = induce(c);
  return {std::move(p), c.source_id, std::move(c)};
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw InputError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void write_json(const Globals& g, const json& report) {
  if (g.json_path.empty()) return;
  if (g.json_path == "-") {
    std::cout << report.dump(2) << '\n';
    return;
  }
  std::ofstream out(g.json_path, std::ios::binary);
  if (!out) throw InputError("cannot write " + g.json_path);
  out << report.dump(2) << '\n';
}

json grammar_json(const Pcfg& p) {
  json rules = json::array();
  for (std::size_t i = 0; i < p.rules().size(); ++i) {
    const auto& r = p.rules()[i];
    json rhs = json::array();
    for (const auto& s : r.rhs) rhs.push_back(p.label(s));
    rules.push_back({{"lhs", p.nonterminals()[r.lhs]}, {"rhs", rhs}, {"prob", r.prob}, {"freq", r.freq}});
  }
  return {{"root", p.root_label()},
          {"nonterminals", p.nonterminals().size()},
          {"terminals", p.terminals().size()},
          {"rules", rules}};
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size()) throw InputError("bad sample size '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw InputError("empty size list");
  return out;
}

std::string sentences_field(const GrammarSource& src) {
  return src.corpus ? std::to_string(src.corpus->sentence_count()) : "";
}

// ---------------------------------------------------------------------------

int run_induce(const Globals& g, const std::vector<std::string>& files) {
  const Corpus c = load_pooled(g, files);
  const Pcfg p = induce(c);
  Output out(g.output);
  write_grammar(out.stream(), p);
  json j = grammar_json(p);
  j["sentences"] = c.sentence_count();
  write_json(g, j);
  return 0;
}

int run_entropy(const Globals& g, const std::string& grammar_file, const std::vector<std::string>& files,
                bool per_nonterminal) {
  const auto src = grammar_source(g, grammar_file, files);
  const auto& p = src.grammar;
  const EntropyVector h = derivational_entropies(p);
  Output out(g.output);
  CsvWriter csv(out.stream());
  json j{{"source", src.source}, {"unit", unit_name(g)}};
  if (per_nonterminal) {
    const EntropyVector h0 = local_entropies(p);
    csv.row({"nonterminal", "local_entropy", "entropy"});
    json rows = json::array();
    for (std::size_t a = 0; a < p.nonterminals().size(); ++a) {
      const auto i = static_cast<Eigen::Index>(a);
      csv.row({p.nonterminals()[a], format_double(unit(g, h0(i))), format_double(unit(g, h(i)))});
      rows.push_back({{"nonterminal", p.nonterminals()[a]}, {"local_entropy", unit(g, h0(i))}, {"entropy", unit(g, h(i))}});
    }
    j["nonterminals"] = rows;
  } else {
    csv.row({"source", "sentences", "nonterminals", "rules", "entropy"});
    const double value = unit(g, h(p.root()));
    csv.row({src.source, sentences_field(src), std::to_string(p.nonterminals().size()),
             std::to_string(p.rules().size()), format_double(value)});
    j["entropy"] = value;
    j["nonterminals"] = p.nonterminals().size();
    j["rules"] = p.rules().size();
  }
  write_json(g, j);
  return 0;
}

int run_mlu(const Globals& g, const std::string& grammar_file, const std::vector<std::string>& files) {
  const auto src = grammar_source(g, grammar_file, files);
  const double gm = grammar_mlu(src.grammar);
  Output out(g.output);
  CsvWriter csv(out.stream());
  csv.row({"source", "sentences", "grammar_mlu", "corpus_mlu"});
  std::optional<double> cm;
  if (src.corpus) cm = corpus_mlu(*src.corpus);
  csv.row({src.source, sentences_field(src), format_double(gm), cm ? format_double(*cm) : ""});
  json j{{"source", src.source}, {"grammar_mlu", gm}};
  if (cm) j["corpus_mlu"] = *cm;
  write_json(g, j);
  return 0;
}

int run_rate(const Globals& g, const std::string& grammar_file, const std::vector<std::string>& files) {
  const auto src = grammar_source(g, grammar_file, files);
  const RateReport r = entropy_rate(src.grammar);
  Output out(g.output);
  CsvWriter csv(out.stream());
  csv.row({"source", "entropy", "mlu", "rate", "spectral_radius"});
  csv.row({src.source, format_double(unit(g, r.entropy)), format_double(r.mlu), format_double(unit(g, r.rate)),
           format_double(r.spectral_radius)});
  write_json(g, {{"source", src.source},
                 {"unit", unit_name(g)},
                 {"entropy", unit(g, r.entropy)},
                 {"mlu", r.mlu},
                 {"rate", unit(g, r.rate)},
                 {"spectral_radius", r.spectral_radius}});
  return 0;
}

int run_site(const Globals& g, const std::string& grammar_file, const std::vector<std::string>& files) {
  const auto src = grammar_source(g, grammar_file, files);
  const SmootherKind k = parse_smoother(g.smoother);
  const double value = unit(g, site(src.grammar, k));
  Output out(g.output);
  CsvWriter csv(out.stream());
  csv.row({"source", "sentences", "estimator", "entropy"});
  csv.row({src.source, sentences_field(src), to_string(site_method(k)), format_double(value)});
  write_json(g, {{"source", src.source},
                 {"estimator", to_string(site_method(k))},
                 {"unit", unit_name(g)},
                 {"entropy", value}});
  return 0;
}

int run_sample(const Globals& g, const std::string& grammar_file, const std::vector<std::string>& files,
               std::size_t n, std::size_t max_nodes) {
  const auto src = grammar_source(g, grammar_file, files);
  Output out(g.output);
  std::size_t retries = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = sample(src.grammar, mix_seed(g.seed, i), max_nodes);
    retries += s.retries;
    out.stream() << to_bracketed(s.tree) << '\n';
  }
  write_json(g, {{"source", src.source}, {"seed", g.seed}, {"sentences", n}, {"retries", retries}});
  return 0;
}

int run_convert(const Globals& g, const std::vector<std::string>& files) {
  if (files.empty()) throw InputError("no input files given");
  Globals conv = g;
  conv.format = "conllu";
  Output out(g.output);
  std::size_t converted = 0, skipped = 0;
  json skipped_ids = json::array();
  for (const auto& f : files) {
    const auto c = load(conv, f);
    for (const auto& t : c.corpus.sentences) out.stream() << to_bracketed(t) << '\n';
    converted += c.corpus.sentence_count();
    skipped += c.skipped_nonprojective;
    for (const auto& id : c.skipped_ids) skipped_ids.push_back(id);
  }
  std::cerr << "sitekit: converted " << converted << " sentence(s), skipped " << skipped << " non-projective\n";
  write_json(g, {{"converted", converted},
                 {"skipped_nonprojective", skipped},
                 {"skipped_ids", skipped_ids},
                 {"labeled", !g.unlabeled},
                 {"use_pos", !g.word_forms}});
  return 0;
}

int run_converge(const Globals& g, const std::string& grammar_file, const std::vector<std::string>& files,
                 const std::string& sizes, std::size_t replications, const std::vector<std::string>& estimators,
                 std::size_t max_nodes) {
  const auto src = grammar_source(g, grammar_file, files);
  ConvergenceConfig cfg;
  if (!sizes.empty()) cfg.sizes = parse_sizes(sizes);
  cfg.replications = replications;
  if (!estimators.empty()) {
    cfg.estimators.clear();
    for (const auto& e : estimators) cfg.estimators.push_back(parse_method(e));
  }
  cfg.seed = g.seed;
  cfg.threads = g.threads;
  cfg.max_nodes = max_nodes;
  const auto result = converge(src.grammar, cfg);

  Output out(g.output);
  CsvWriter csv(out.stream());
  csv.row({"sample_size", "estimator", "mean", "ci95_low", "ci95_high", "replications"});
  for (const auto& r : result.rows) {
    const bool percent = r.estimator == kRuleCoverage || r.estimator == kNonterminalCoverage;
    auto conv = [&](double v) { return percent ? v : unit(g, v); };
    csv.row({std::to_string(r.sample_size), r.estimator, format_double(conv(r.mean)), format_double(conv(r.ci95_low)),
             format_double(conv(r.ci95_high)), std::to_string(r.replications)});
  }
  json est = json::array();
  for (auto m : cfg.estimators) est.push_back(to_string(m));
  write_json(g, {{"source", src.source},
                 {"seed", g.seed},
                 {"unit", unit_name(g)},
                 {"true_entropy", unit(g, result.true_entropy)},
                 {"sizes", cfg.sizes},
                 {"replications", cfg.replications},
                 {"estimators", est},
                 {"sampling_retries", result.sampling_retries}});
  return 0;
}

int run_incremental(const Globals& g, const std::vector<std::string>& files, bool shuffle) {
  std::vector<Corpus> corpora;
  for (const auto& f : files) corpora.push_back(load(g, f).corpus);
  const auto k = parse_smoother(g.smoother);
  const auto result = incremental(corpora, shuffle ? Order::Shuffled : Order::Original, g.seed, k);
  Output out(g.output);
  CsvWriter csv(out.stream());
  csv.row({"step", "sentences", "entropy", "mlu"});
  for (const auto& p : result.points)
    csv.row({std::to_string(p.step), std::to_string(p.sentences), format_double(unit(g, p.entropy)),
             format_double(p.mlu)});
  json j{{"order", shuffle ? "shuffled" : "original"},
         {"estimator", to_string(site_method(k))},
         {"unit", unit_name(g)},
         {"final_entropy", unit(g, result.points.back().entropy)}};
  if (shuffle) j["seed"] = g.seed;
  write_json(g, j);
  return 0;
}

int run_report(const Globals& g, const std::vector<std::string>& files) {
  if (files.empty()) throw InputError("no input files given");
  std::vector<Corpus> corpora;
  for (const auto& f : files) corpora.push_back(load(g, f).corpus);
  const auto k = parse_smoother(g.smoother);
  const auto reports = file_reports(corpora, k);
  Output out(g.output);
  CsvWriter csv(out.stream());
  csv.row({"file_id", "sentences", "mlu", "entropy", "log_n"});
  json rows = json::array();
  for (const auto& r : reports) {
    csv.row({r.file_id, std::to_string(r.sentences), format_double(r.mlu), format_double(unit(g, r.entropy)),
             format_double(r.log_n)});
    rows.push_back({{"file_id", r.file_id},
                    {"sentences", r.sentences},
                    {"mlu", r.mlu},
                    {"entropy", unit(g, r.entropy)},
                    {"log_n", r.log_n}});
  }
  write_json(g, {{"estimator", to_string(site_method(k))}, {"unit", unit_name(g)}, {"files", rows}});
  return 0;
}

std::vector<double> numeric_column(const std::vector<std::vector<std::string>>& rows, const std::string& name) {
  const auto& header = rows.front();
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError("no column '" + name + "' in the input table");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (col >= rows[r].size()) throw InputError("row " + std::to_string(r + 1) + " is too short");
    const std::string& cell = rows[r][col];
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != cell.size())
      throw InputError("row " + std::to_string(r + 1) + ": '" + cell + "' in column " + name + " is not a number");
    out.push_back(v);
  }
  return out;
}

int run_fit(const Globals& g, const std::string& table, const std::string& xcol, const std::string& ycol,
            bool no_intercept, const std::string& residualize_by) {
  const auto rows = parse_csv(slurp(table));
  if (rows.empty()) throw InputError("empty input table");
  const auto x = numeric_column(rows, xcol);
  auto y = numeric_column(rows, ycol);
  if (!residualize_by.empty()) y = residualize(y, numeric_column(rows, residualize_by));
  const RegressionFit f = fit(x, y, !no_intercept);
  const Correlation rho = spearman(x, y);

  auto coef = [](const std::optional<Coefficient>& c) -> std::vector<std::string> {
    if (!c) return {"", "", "", ""};
    return {format_double(c->estimate), format_double(c->stderr_), format_double(c->t), format_double(c->p)};
  };
  Output out(g.output);
  CsvWriter csv(out.stream());
  csv.row({"slope", "slope_stderr", "slope_t", "slope_p", "intercept", "intercept_stderr", "intercept_t",
           "intercept_p", "r", "spearman", "spearman_p", "n", "df"});
  std::vector<std::string> row = coef(f.slope);
  const auto icpt = coef(f.intercept);
  row.insert(row.end(), icpt.begin(), icpt.end());
  row.push_back(format_double(f.r));
  row.push_back(format_double(rho.coefficient));
  row.push_back(format_double(rho.p));
  row.push_back(std::to_string(f.n));
  row.push_back(std::to_string(f.df));
  csv.row(row);

  auto coef_json = [](const Coefficient& c) {
    return json{{"estimate", c.estimate}, {"stderr", c.stderr_}, {"t", c.t}, {"p", c.p}};
  };
  json j{{"x", xcol}, {"y", ycol}, {"slope", coef_json(f.slope)}, {"r", f.r},
         {"spearman", {{"rho", rho.coefficient}, {"p", rho.p}}}, {"n", f.n}, {"df", f.df}};
  if (f.intercept) j["intercept"] = coef_json(*f.intercept);
  if (!residualize_by.empty()) j["residualized_by"] = residualize_by;
  write_json(g, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Treebank grammars: induction, derivational entropy and entropy estimators"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;

  app.add_option("--format", g.format, "Input treebank format")->check(CLI::IsMember({"ptb", "conllu"}));
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--smoother", g.smoother, "Local entropy smoother for SITE")->check(CLI::IsMember({"ml", "cae", "cwj"}));
  auto* bits = app.add_flag("--bits", "Report entropies in bits (default)");
  app.add_flag("--nats", g.nats, "Report entropies in nats")->excludes(bits);
  app.add_option("-o,--output", g.output, "Write the main output here instead of stdout");
  app.add_option("--json", g.json_path, "Also write a JSON report to this path ('-' for stdout)");
  app.add_option("--threads", g.threads, "Worker threads for replication sweeps (capped by SITE_THREADS)");
  app.add_flag("--no-preterminalize", g.no_preterminalize, "Keep words as leaves instead of POS tags");
  app.add_flag("--strip-function-tags", g.strip_function_tags, "Reduce labels like NP-SBJ-1 to NP");
  app.add_option("--drop-label", g.drop_labels, "Labels of empty elements to prune (default -NONE-)");
  app.add_flag("--keep-empty", g.keep_empty, "Do not prune empty elements");
  app.add_flag("--unlabeled", g.unlabeled, "Dependency conversion without relation nodes");
  app.add_flag("--word-forms", g.word_forms, "Dependency conversion on word forms instead of POS tags");

  std::vector<std::string> files;
  std::string grammar_file;
  auto add_inputs = [&](CLI::App* sub, bool allow_grammar) {
    sub->add_option("files", files, "Treebank files ('-' for stdin)");
    if (allow_grammar) sub->add_option("-g,--grammar", grammar_file, "Serialized grammar instead of treebank files");
  };

  auto* induce_cmd = app.add_subcommand("induce", "Induce a maximum-likelihood PCFG and print it");
  add_inputs(induce_cmd, false);

  bool per_nt = false;
  auto* entropy_cmd = app.add_subcommand("entropy", "Exact derivational entropy of a grammar");
  add_inputs(entropy_cmd, true);
  entropy_cmd->add_flag("--per-nonterminal", per_nt, "One row per non-terminal");

  auto* mlu_cmd = app.add_subcommand("mlu", "Mean length of utterance of a grammar (and corpus)");
  add_inputs(mlu_cmd, true);
  auto* rate_cmd = app.add_subcommand("rate", "Entropy, MLU and entropy rate");
  add_inputs(rate_cmd, true);
  auto* site_cmd = app.add_subcommand("site", "Smoothed entropy estimate (SITE)");
  add_inputs(site_cmd, true);

  std::size_t n = 10, max_nodes = kDefaultMaxNodes;
  auto* sample_cmd = app.add_subcommand("sample", "Sample trees from a grammar");
  add_inputs(sample_cmd, true);
  sample_cmd->add_option("-n,--count", n, "Number of trees");
  sample_cmd->add_option("--max-nodes", max_nodes, "Reject derivations larger than this");

  auto* convert_cmd = app.add_subcommand("convert", "Convert CoNLL-U dependencies to bracketed trees");
  add_inputs(convert_cmd, false);

  std::string sizes;
  std::size_t replications = 100;
  std::vector<std::string> estimators;
  auto* converge_cmd = app.add_subcommand("converge", "Estimator convergence on samples from a grammar");
  add_inputs(converge_cmd, true);
  converge_cmd->add_option("--sizes", sizes, "Comma-separated sample sizes (default: 24 sizes from 1 to 15000)");
  converge_cmd->add_option("--replications", replications, "Replications per size");
  converge_cmd->add_option("--estimators", estimators, "ml_exact, monte_carlo, site_ml, site_cae, site_cwj")
      ->delimiter(',');
  converge_cmd->add_option("--max-nodes", max_nodes, "Reject derivations larger than this");

  bool shuffle = false;
  auto* incremental_cmd = app.add_subcommand("incremental", "Cumulative SITE entropy, one file at a time");
  add_inputs(incremental_cmd, false);
  incremental_cmd->add_flag("--shuffle", shuffle, "Pool and shuffle sentences first (uses --seed)");

  auto* report_cmd = app.add_subcommand("report", "Per-file MLU and entropy table");
  add_inputs(report_cmd, false);

  std::string table, xcol = "mlu", ycol = "entropy", resid;
  bool no_intercept = false;
  auto* fit_cmd = app.add_subcommand("fit", "Least-squares fit on a CSV table (e.g. from report)");
  fit_cmd->add_option("table", table, "CSV with a header row ('-' for stdin)")->required();
  fit_cmd->add_option("--x", xcol, "Predictor column");
  fit_cmd->add_option("--y", ycol, "Response column");
  fit_cmd->add_flag("--no-intercept", no_intercept, "Fit through the origin");
  fit_cmd->add_option("--residualize", resid, "Replace y by its residuals on this column first (e.g. log_n)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*induce_cmd) return run_induce(g, files);
    if (*entropy_cmd) return run_entropy(g, grammar_file, files, per_nt);
    if (*mlu_cmd) return run_mlu(g, grammar_file, files);
    if (*rate_cmd) return run_rate(g, grammar_file, files);
    if (*site_cmd) return run_site(g, grammar_file, files);
    if (*sample_cmd) return run_sample(g, grammar_file, files, n, max_nodes);
    if (*convert_cmd) return run_convert(g, files);
    if (*converge_cmd) return run_converge(g, grammar_file, files, sizes, replications, estimators, max_nodes);
    if (*incremental_cmd) return run_incremental(g, files, shuffle);
    if (*report_cmd) return run_report(g, files);
    if (*fit_cmd) return run_fit(g, table, xcol, ycol, no_intercept, resid);
  } catch (const InputError& e) {
    std::cerr << "sitekit: input error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "sitekit: numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "sitekit: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
