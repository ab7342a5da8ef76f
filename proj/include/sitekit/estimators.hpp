#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sitekit/pcfg.hpp"

namespace sitekit {

/// Estimator applied to each non-terminal's local expansion entropy.
enum class SmootherKind { ML, CAE, CWJ };

enum class Method { MLExact, MonteCarlo, SiteML, SiteCAE, SiteCWJ };

std::string to_string(SmootherKind k);
std::string to_string(Method m);
SmootherKind parse_smoother(std::string_view name);
Method parse_method(std::string_view name);
Method site_method(SmootherKind k);

struct EstimateResult {
  double value = 0.0;  // bits
  Method method = Method::MLExact;
  std::size_t sample_size = 0;  // sentences
};

/// Plug-in entropy of the relative frequencies, in bits.
double ml_entropy(const FreqTable& t);

struct GoodTuringProbs {
  std::vector<double> probs;
  /// Set when every type is a singleton, in which case the discount would be
  /// total and the ML probabilities are returned instead.
  bool fallback = false;
};

/// ML probabilities scaled by the sample coverage estimate 1 - f1/n.
GoodTuringProbs good_turing_probs(const FreqTable& t);

/// Coverage-adjusted entropy estimator (Chao and Shen 2003), in bits.
double cae_entropy(const FreqTable& t);

/// Entropy estimator based on the species accumulation curve
/// (Chao, Wang and Jost 2013), in bits. Evaluated in nats internally.
double cwj_entropy(const FreqTable& t);

double smoothed_entropy(const FreqTable& t, SmootherKind k);

/// Derivational entropy of `g` with each local expansion entropy replaced by
/// the chosen estimate over that non-terminal's rule frequencies; the
/// characteristic matrix is the plain ML one. With SmootherKind::ML this is
/// bit-for-bit derivational_entropy(g).
double site(const Pcfg& g, SmootherKind k);

/// Induces the ML grammar of `c` and applies site().
EstimateResult site(const Corpus& c, SmootherKind k);

/// -(1/|test|) sum over test trees of log2 p(t) under the ML grammar of
/// `train`. Throws OutOfGrammarError listing test rules absent from train.
EstimateResult monte_carlo_cross_entropy(const Corpus& train, const Corpus& test);

/// Same estimate when test trees are given as rule counts of `g` and the
/// number of trees they came from.
double monte_carlo_cross_entropy(const Pcfg& g, const std::vector<std::uint64_t>& test_rule_counts,
                                 std::size_t test_trees);

}  // namespace sitekit
