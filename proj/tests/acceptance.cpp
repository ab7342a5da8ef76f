// Acceptance run: one PASS / FAIL / SKIP line per criterion, non-zero exit
// when anything fails. Data-dependent checks run only when the treebank
// paths are given through SITEKIT_WSJ_PTB / SITEKIT_WSJ_CONLLU.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "sitekit/sitekit.hpp"

using namespace sitekit;

namespace {

int failures = 0;

enum class Verdict { Pass, Fail, Skip };

void report(int id, Verdict v, const std::string& detail) {
  const char* tag = v == Verdict::Pass ? "PASS" : v == Verdict::Fail ? "FAIL" : "SKIP";
  if (v == Verdict::Fail) ++failures;
  std::printf("%s criterion %d: %s\n", tag, id, detail.c_str());
  std::fflush(stdout);
}

Verdict verdict(bool ok) { return ok ? Verdict::Pass : Verdict::Fail; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// the grammar used by the convergence and proportionality checks
const Pcfg& zipf() {
  static const Pcfg g = synthetic::zipf_grammar(5);
  return g;
}

double h2(double q) { return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q); }

std::string csv_of(const ConvergenceResult& r) {
  std::ostringstream os;
  CsvWriter w(os);
  for (const auto& row : r.rows)
    w.row({std::to_string(row.sample_size), row.estimator, format_double(row.mean), format_double(row.ci95_low),
           format_double(row.ci95_high), std::to_string(row.replications)});
  return os.str();
}

void exact_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240501);
  int checked = 0, bad = 0;
  double worst = 0.0;
  while (checked < 20) {
    const Pcfg g = oracle::random_grammar(rng, oracle::uniform_int(rng, 1, 5));
    if (spectral_radius(characteristic_matrix(g)) > 0.9) continue;
    ++checked;
    const auto brute = oracle::depth_bounded_entropy(g, 1.0 - 1e-10);
    const double err = std::abs(derivational_entropy(g) - brute.entropy_bits);
    worst = std::max(worst, err);
    if (err > 1e-6 || brute.mass < 1.0 - 1e-10) ++bad;
  }
  const double secs = seconds_since(t0);
  report(1, verdict(bad == 0 && secs < 60.0),
         fmt("%d/20 grammars off, max |error| %.2e bits, %.2f s", bad, worst, secs));
}

void closed_forms() {
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double q = i / 10.0;
    const Pcfg g = Pcfg::from_rules("S", {{"S", {"a", "S"}, q, 0}, {"S", {"a"}, 1.0 - q, 0}});
    const RateReport r = entropy_rate(g);
    worst = std::max({worst, std::abs(r.entropy - h2(q) / (1.0 - q)), std::abs(r.mlu - 1.0 / (1.0 - q)),
                      std::abs(r.rate - h2(q))});
  }
  report(2, verdict(worst <= 1e-9), fmt("max deviation %.2e over q = 0.1..0.9", worst));
}

void estimator_values() {
  const FreqTable t({2, 2});
  const double cwj = cwj_entropy(t), cae = cae_entropy(t), ml = ml_entropy(t);
  const bool ok = std::abs(cwj - 1.202274) <= 1e-6 && std::abs(cae - 1.066667) <= 1e-6 && std::abs(ml - 1.0) <= 1e-6;
  report(3, verdict(ok),
         fmt("CWJ %.10f (listed 1.202274), CAE %.10f (listed 1.066667), ML %.10f (listed 1.0)", cwj, cae, ml));
}

void convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  ConvergenceConfig cfg;
  cfg.estimators = {Method::MLExact, Method::MonteCarlo, Method::SiteCWJ};
  const ConvergenceResult r = converge(zipf(), cfg);
  const double secs = seconds_since(t0);
  const double h = r.true_entropy;

  const auto& cwj = r.row(122, to_string(Method::SiteCWJ));
  const auto& ml = r.row(122, to_string(Method::MLExact));
  const bool a = cwj.ci95_low <= h && h <= cwj.ci95_high;
  const bool b = ml.mean < 0.9 * h;

  double worst = 0.0;
  for (std::size_t n : cfg.sizes) {
    const double m = r.row(n, to_string(Method::MLExact)).mean;
    const double mc = r.row(n, to_string(Method::MonteCarlo)).mean;
    // both are exactly zero while the sample still has no choice points
    const double rel = m == 0.0 && mc == 0.0 ? 0.0 : std::abs(m - mc) / std::max(std::abs(m), std::abs(mc));
    worst = std::max(worst, rel);
  }
  const bool c = worst < 0.01;
  report(4, verdict(a && b && c && secs < 600.0),
         fmt("true H %.3f; (a) SITE-CWJ@122 %.3f [%.3f, %.3f] %s; (b) ML@122 %.3f (%+.1f%%) %s; "
             "(c) max |ML-MC| %.2e %s; %.1f s",
             h, cwj.mean, cwj.ci95_low, cwj.ci95_high, a ? "ok" : "miss", ml.mean, 100.0 * (ml.mean / h - 1.0),
             b ? "ok" : "miss", worst, c ? "ok" : "miss", secs));
}

void wsj_numbers() {
  const char* ptb = std::getenv("SITEKIT_WSJ_PTB");
  const char* dep = std::getenv("SITEKIT_WSJ_CONLLU");
  if (!ptb && !dep) {
    report(5, Verdict::Skip, "set SITEKIT_WSJ_PTB and/or SITEKIT_WSJ_CONLLU to the 3,914-sentence sample");
    return;
  }
  bool ok = true;
  std::string detail;
  auto check = [&](const char* label, const char* path, TreebankFormat format, std::size_t rules, std::size_t nts,
                   double h) {
    LoadOptions opts;
    opts.format = format;
    const Pcfg g = induce(load_corpus_file(path, opts).corpus);
    const double got = derivational_entropy(g);
    const bool fine = g.rules().size() == rules && g.nonterminals().size() == nts && std::abs(got / h - 1.0) <= 0.01;
    ok = ok && fine;
    detail += fmt("%s %zu rules / %zu NTs / H %.3f (expected %zu / %zu / %.3f); ", label, g.rules().size(),
                  g.nonterminals().size(), got, rules, nts, h);
  };
  try {
    if (ptb) check("CFG", ptb, TreebankFormat::Ptb, 8009, 662, 103.445);
    if (dep) check("DG", dep, TreebankFormat::Conllu, 8104, 46, 78.36);
  } catch (const Error& e) {
    ok = false;
    detail += e.what();
  }
  report(5, verdict(ok), detail);
}

void proportionality() {
  // 199 files with log-normal sizes clipped to 1..185 sentences (mean ~20)
  Rng rng(mix_seed(1, 199));
  std::lognormal_distribution<double> size(2.48, 1.0);
  std::vector<Corpus> files;
  for (int i = 0; i < 199; ++i) {
    const double n = std::clamp(std::round(size(rng)), 1.0, 185.0);
    files.push_back(sample_corpus(zipf(), static_cast<std::size_t>(n), mix_seed(2, i)));
  }
  const auto reports = file_reports(files);
  std::vector<double> mlu, h, log_n;
  for (const auto& r : reports) {
    mlu.push_back(r.mlu);
    h.push_back(r.entropy);
    log_n.push_back(r.log_n);
  }
  const RegressionFit raw = fit(mlu, h, false);
  const RegressionFit with = fit(mlu, h, true);
  const std::vector<double> resid = residualize(h, log_n);
  const double r_resid = pearson(mlu, resid).coefficient;
  const bool ok = raw.r > 0.8 && r_resid > 0.9 && std::abs(with.intercept->t) < 2.0;
  report(6, verdict(ok),
         fmt("r raw %.3f (>0.8), r residualized %.3f (>0.9), intercept %.3f t[%zu] = %.2f (|t|<2), "
             "no-intercept slope %.3f bits/symbol; WSJ slopes not checked (no data)",
             raw.r, r_resid, with.intercept->estimate, with.df, with.intercept->t, raw.slope.estimate));
}

void round_trip() {
  Rng rng(31337);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const DepGraph g = oracle::random_projective(rng, oracle::uniform_int(rng, 1, 30));
    const DepGraph back = tree_to_dep(dep_to_tree(g));
    bool same = back.heads == g.heads && back.labels == g.labels && back.size() == g.size();
    for (std::size_t k = 0; same && k < g.size(); ++k) same = back.tokens[k].pos == g.tokens[k].pos;
    if (!same) ++bad;
  }
  report(7, verdict(bad == 0), fmt("%d/1000 graphs changed", bad));
}

void determinism() {
  ConvergenceConfig cfg;
  cfg.sizes = {1, 55, 122, 500};
  cfg.replications = 20;
  cfg.seed = 8;
  std::string out[2];
  const char* threads[2] = {"1", "4"};
  for (int i = 0; i < 2; ++i) {
    ::setenv("SITE_THREADS", threads[i], 1);
    out[i] = csv_of(converge(zipf(), cfg));
  }
  ::unsetenv("SITE_THREADS");
  report(8, verdict(!out[0].empty() && out[0] == out[1]),
         fmt("SITE_THREADS=1 vs 4: %zu vs %zu bytes, %s", out[0].size(), out[1].size(),
             out[0] == out[1] ? "identical" : "different"));
}

void incremental_endpoints() {
  std::vector<Corpus> files;
  for (int i = 0; i < 12; ++i) files.push_back(sample_corpus(zipf(), 5 + 3 * i, mix_seed(9, i)));
  const auto a = incremental(files, Order::Original);
  const auto b = incremental(files, Order::Shuffled, 77);
  const double da = a.points.back().entropy, db = b.points.back().entropy;
  report(9, verdict(std::abs(da - db) <= 1e-9), fmt("original %.12f, shuffled %.12f bits", da, db));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> steps{exact_oracle,    closed_forms, estimator_values,
                                                 convergence,     wsj_numbers,  proportionality,
                                                 round_trip,      determinism,  incremental_endpoints};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    try {
      steps[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), Verdict::Fail, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
