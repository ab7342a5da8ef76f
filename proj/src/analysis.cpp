#include "sitekit/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "sitekit/entropy_exact.hpp"
#include "sitekit/errors.hpp"

namespace sitekit {

std::size_t worker_count(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SITE_THREADS"); env && *env) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end && *end == '\0' && cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw InputError("uniform_below: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t v = rng();
    if (v < limit) return v % bound;
  }
}

std::vector<std::size_t> default_sizes() {
  return {1, 2, 3, 5, 7, 11, 17, 25, 37, 55, 82, 122, 183, 273, 407, 608, 908, 1355, 2023, 3020, 4509, 6731, 10048, 15000};
}

// ---------------------------------------------------------------------------
// Convergence

ConvergenceRow summarize(std::size_t sample_size, std::string estimator, std::span<const double> values) {
  ConvergenceRow row;
  row.sample_size = sample_size;
  row.estimator = std::move(estimator);
  row.replications = values.size();
  if (values.empty()) return row;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double half = 1.96 * sd / std::sqrt(n);
  row.mean = mean;
  row.ci95_low = mean - half;
  row.ci95_high = mean + half;
  return row;
}

const ConvergenceRow& ConvergenceResult::row(std::size_t sample_size, const std::string& estimator) const {
  for (const auto& r : rows)
    if (r.sample_size == sample_size && r.estimator == estimator) return r;
  throw InputError("no convergence row for size " + std::to_string(sample_size) + " and " + estimator);
}

namespace {

struct ReplicationOutcome {
  std::vector<double> estimates;  // one per configured estimator
  double rule_coverage = 0.0;
  double nonterminal_coverage = 0.0;
  std::size_t retries = 0;
};

ReplicationOutcome run_replication(const Sampler& sampler, std::size_t size, std::uint64_t seed,
                                   const std::vector<Method>& estimators) {
  const Pcfg& truth = sampler.grammar();
  Rng rng(seed);
  std::vector<std::uint64_t> counts(truth.rules().size(), 0);
  ReplicationOutcome out;
  for (std::size_t i = 0; i < size; ++i)
    for (auto r : sampler.derivation(rng, &out.retries)) ++counts[r];

  const Pcfg induced = Pcfg::from_rule_counts(truth, counts);
  std::vector<std::uint64_t> induced_counts;
  induced_counts.reserve(induced.rules().size());
  for (auto c : counts)
    if (c > 0) induced_counts.push_back(c);

  std::optional<double> ml_exact;
  for (Method m : estimators) {
    double v = 0.0;
    switch (m) {
      case Method::MLExact:
      case Method::SiteML:
        if (!ml_exact) ml_exact = derivational_entropy(induced);
        v = *ml_exact;
        break;
      case Method::MonteCarlo: v = monte_carlo_cross_entropy(induced, induced_counts, size); break;
      case Method::SiteCAE: v = site(induced, SmootherKind::CAE); break;
      case Method::SiteCWJ: v = site(induced, SmootherKind::CWJ); break;
    }
    out.estimates.push_back(v);
  }
  out.rule_coverage = 100.0 * static_cast<double>(induced.rules().size()) / static_cast<double>(truth.rules().size());
  out.nonterminal_coverage =
      100.0 * static_cast<double>(induced.nonterminals().size()) / static_cast<double>(truth.nonterminals().size());
  return out;
}

}  // namespace

ConvergenceResult converge(const Pcfg& truth, const ConvergenceConfig& cfg) {
  if (cfg.replications == 0) throw InputError("at least one replication is required");
  if (!std::is_sorted(cfg.sizes.begin(), cfg.sizes.end())) throw InputError("sample sizes must be ascending");
  if (std::find(cfg.sizes.begin(), cfg.sizes.end(), std::size_t{0}) != cfg.sizes.end())
    throw InputError("sample sizes must be positive");

  ConvergenceResult result;
  result.true_entropy = derivational_entropy(truth);
  const Sampler sampler(truth, cfg.max_nodes);

  const std::size_t tasks = cfg.sizes.size() * cfg.replications;
  std::vector<ReplicationOutcome> outcomes(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks) return;
      const std::size_t s = task / cfg.replications;
      const std::size_t r = task % cfg.replications;
      try {
        outcomes[task] = run_replication(sampler, cfg.sizes[s], mix_seed(mix_seed(cfg.seed, s), r), cfg.estimators);
      } catch (...) {
        errors[task] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(worker_count(cfg.threads), tasks);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> values(cfg.replications);
  for (std::size_t s = 0; s < cfg.sizes.size(); ++s) {
    const auto* block = &outcomes[s * cfg.replications];
    for (std::size_t k = 0; k < cfg.estimators.size(); ++k) {
      for (std::size_t r = 0; r < cfg.replications; ++r) values[r] = block[r].estimates[k];
      result.rows.push_back(summarize(cfg.sizes[s], to_string(cfg.estimators[k]), values));
    }
    for (std::size_t r = 0; r < cfg.replications; ++r) values[r] = block[r].rule_coverage;
    result.rows.push_back(summarize(cfg.sizes[s], kRuleCoverage, values));
    for (std::size_t r = 0; r < cfg.replications; ++r) values[r] = block[r].nonterminal_coverage;
    result.rows.push_back(summarize(cfg.sizes[s], kNonterminalCoverage, values));
    for (std::size_t r = 0; r < cfg.replications; ++r) result.sampling_retries += block[r].retries;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Incremental

IncrementalResult incremental(const std::vector<Corpus>& files, Order order, std::uint64_t seed,
                              SmootherKind smoother) {
  if (files.size() < 2) throw InputError("incremental analysis needs at least two files");
  IncrementalResult result;
  result.order = order;
  result.seed = seed;

  std::vector<const Tree*> sequence;
  std::vector<std::size_t> chunk_sizes;
  for (const auto& f : files) {
    if (f.empty()) throw InputError("file " + f.source_id + " has no sentences");
    chunk_sizes.push_back(f.sentence_count());
    for (const auto& t : f.sentences) sequence.push_back(&t);
  }
  if (order == Order::Shuffled) {
    Rng rng(seed);
    fisher_yates(sequence, rng);
  }

  TreebankCounter counter;
  std::size_t pos = 0;
  std::size_t leaves = 0;
  for (std::size_t step = 0; step < chunk_sizes.size(); ++step) {
    for (std::size_t i = 0; i < chunk_sizes[step]; ++i, ++pos) {
      counter.add(*sequence[pos]);
      leaves += sequence[pos]->frontier_size();
    }
    IncrementalPoint p;
    p.step = step + 1;
    p.sentences = counter.sentences();
    p.entropy = site(counter.grammar(), smoother);
    p.mlu = static_cast<double>(leaves) / static_cast<double>(p.sentences);
    result.points.push_back(p);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Reports and regressions

FileReport file_report(const Corpus& file, SmootherKind smoother) {
  if (file.empty()) throw InputError("file " + file.source_id + " has no sentences");
  FileReport rep;
  rep.file_id = file.source_id;
  rep.sentences = file.sentence_count();
  rep.mlu = corpus_mlu(file);
  rep.entropy = site(induce(file), smoother);
  rep.log_n = std::log(static_cast<double>(rep.sentences));
  return rep;
}

std::vector<FileReport> file_reports(const std::vector<Corpus>& files, SmootherKind smoother) {
  std::vector<FileReport> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(file_report(f, smoother));
  return out;
}

namespace {

double two_sided_p(double t, double df) {
  if (std::isnan(t) || df <= 0) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

Coefficient coefficient(double estimate, double se, double df) {
  Coefficient c;
  c.estimate = estimate;
  c.stderr_ = se;
  if (se > 0.0) {
    c.t = estimate / se;
  } else {
    c.t = estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), estimate);
  }
  c.p = c.t == 0.0 && se == 0.0 ? 1.0 : two_sided_p(c.t, df);
  return c;
}

void check_pair(std::span<const double> x, std::span<const double> y, std::size_t min_points) {
  if (x.size() != y.size()) throw InputError("x and y have different lengths");
  if (x.size() < min_points) throw InputError("at least " + std::to_string(min_points) + " points are required");
}

}  // namespace

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 2);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Correlation c;
  if (sxx == 0.0 || syy == 0.0) {
    c.coefficient = std::numeric_limits<double>::quiet_NaN();
    c.p = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  c.coefficient = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = n - 2.0;
  if (df <= 0) {
    c.p = std::numeric_limits<double>::quiet_NaN();
  } else if (std::abs(c.coefficient) >= 1.0) {
    c.p = 0.0;
  } else {
    c.p = two_sided_p(c.coefficient * std::sqrt(df / (1.0 - c.coefficient * c.coefficient)), df);
  }
  return c;
}

namespace {

std::vector<double> mid_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 2);
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  return pearson(rx, ry);
}

RegressionFit fit(std::span<const double> x, std::span<const double> y, bool with_intercept) {
  check_pair(x, y, 3);
  const std::size_t n = x.size();
  const double nd = static_cast<double>(n);
  RegressionFit f;
  f.n = n;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  double sxx_c = 0.0;
  for (double v : x) sxx_c += (v - mx) * (v - mx);
  if (sxx_c == 0.0) throw InputError("x has zero variance; regression is degenerate");

  if (with_intercept) {
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / nd;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) sxy += (x[i] - mx) * (y[i] - my);
    const double slope = sxy / sxx_c;
    const double intercept = my - slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - intercept - slope * x[i];
      rss += e * e;
    }
    f.df = n - 2;
    const double s2 = rss / static_cast<double>(f.df);
    f.slope = coefficient(slope, std::sqrt(s2 / sxx_c), static_cast<double>(f.df));
    f.intercept = coefficient(intercept, std::sqrt(s2 * (1.0 / nd + mx * mx / sxx_c)), static_cast<double>(f.df));
  } else {
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - slope * x[i];
      rss += e * e;
    }
    f.df = n - 1;
    const double s2 = rss / static_cast<double>(f.df);
    f.slope = coefficient(slope, std::sqrt(s2 / sxx), static_cast<double>(f.df));
  }
  f.r = pearson(x, y).coefficient;
  return f;
}

std::vector<double> residualize(std::span<const double> y, std::span<const double> log_n) {
  const RegressionFit f = fit(log_n, y, true);
  std::vector<double> res(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) res[i] = y[i] - f.intercept->estimate - f.slope.estimate * log_n[i];
  return res;
}

}  // namespace sitekit
