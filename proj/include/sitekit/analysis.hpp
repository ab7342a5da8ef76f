#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sitekit/estimators.hpp"
#include "sitekit/pcfg.hpp"

namespace sitekit {

// ---------------------------------------------------------------------------
// Workers and shuffling

/// Worker count for replication sweeps: `requested` if non-zero, otherwise
/// the hardware concurrency; either way capped by $SITE_THREADS when set.
std::size_t worker_count(std::size_t requested = 0);

/// Uniform integer in [0, bound) by rejection, independent of the standard
/// library's distribution implementations.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

template <typename T>
void fisher_yates(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// ---------------------------------------------------------------------------
// Convergence sweeps

/// 24 sample sizes from 1 to 15,000, roughly evenly spaced in log scale.
std::vector<std::size_t> default_sizes();

/// Row ids used for the coverage curves, reported in percent.
inline constexpr const char* kRuleCoverage = "rule_coverage";
inline constexpr const char* kNonterminalCoverage = "nonterminal_coverage";

struct ConvergenceRow {
  std::size_t sample_size = 0;
  std::string estimator;
  double mean = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::size_t replications = 0;
};

struct ConvergenceConfig {
  std::vector<std::size_t> sizes = default_sizes();
  std::size_t replications = 100;
  std::vector<Method> estimators{Method::MLExact, Method::MonteCarlo, Method::SiteCAE, Method::SiteCWJ};
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::size_t max_nodes = kDefaultMaxNodes;
};

struct ConvergenceResult {
  double true_entropy = 0.0;
  std::vector<ConvergenceRow> rows;
  std::size_t sampling_retries = 0;

  const ConvergenceRow& row(std::size_t sample_size, const std::string& estimator) const;
};

/// For every size and replication, samples that many trees from `truth`,
/// re-induces a grammar and applies each estimator. The Monte Carlo estimate
/// is evaluated on the same sample it was induced from. Replication r of size
/// index s draws from the stream mix_seed(mix_seed(seed, s), r), so output
/// does not depend on the number of workers.
ConvergenceResult converge(const Pcfg& truth, const ConvergenceConfig& cfg);

/// Mean and normal-approximation 95% interval (mean +- 1.96 sd / sqrt(n)).
ConvergenceRow summarize(std::size_t sample_size, std::string estimator, std::span<const double> values);

// ---------------------------------------------------------------------------
// Incremental corpus entropy

enum class Order { Original, Shuffled };

struct IncrementalPoint {
  std::size_t step = 0;
  std::size_t sentences = 0;  // cumulative
  double entropy = 0.0;       // bits
  double mlu = 0.0;
};

struct IncrementalResult {
  Order order = Order::Original;
  std::uint64_t seed = 0;
  std::vector<IncrementalPoint> points;
};

/// Cumulative SITE estimate after adding each file in turn. Under
/// Order::Shuffled all sentences are pooled, shuffled with Fisher-Yates, and
/// cut into chunks with the same sizes as the files.
IncrementalResult incremental(const std::vector<Corpus>& files, Order order, std::uint64_t seed = 0,
                              SmootherKind smoother = SmootherKind::CWJ);

// ---------------------------------------------------------------------------
// Per-file reports and regressions

struct FileReport {
  std::string file_id;
  std::size_t sentences = 0;
  double mlu = 0.0;
  double entropy = 0.0;  // bits, SITE with the chosen smoother
  double log_n = 0.0;    // natural log of the sentence count
};

FileReport file_report(const Corpus& file, SmootherKind smoother = SmootherKind::CWJ);
std::vector<FileReport> file_reports(const std::vector<Corpus>& files, SmootherKind smoother = SmootherKind::CWJ);

struct Coefficient {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double t = 0.0;
  double p = 0.0;  // two-sided
};

struct RegressionFit {
  Coefficient slope;
  std::optional<Coefficient> intercept;
  double r = 0.0;  // Pearson correlation of x and y
  std::size_t n = 0;
  std::size_t df = 0;
};

/// Ordinary least squares of y on x, with or without an intercept.
/// Throws InputError when x has no variance or fewer than 3 points are given.
RegressionFit fit(std::span<const double> x, std::span<const double> y, bool with_intercept);

/// Residuals of y ~ 1 + log_n.
std::vector<double> residualize(std::span<const double> y, std::span<const double> log_n);

struct Correlation {
  double coefficient = 0.0;
  double p = 1.0;  // two-sided, t approximation
};

Correlation pearson(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of mid-ranks.
Correlation spearman(std::span<const double> x, std::span<const double> y);

}  // namespace sitekit
