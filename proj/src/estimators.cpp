#include "sitekit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sitekit/entropy_exact.hpp"
#include "sitekit/errors.hpp"

namespace sitekit {

std::string to_string(SmootherKind k) {
  switch (k) {
    case SmootherKind::ML: return "ml";
    case SmootherKind::CAE: return "cae";
    case SmootherKind::CWJ: return "cwj";
  }
  return "?";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::MLExact: return "ml_exact";
    case Method::MonteCarlo: return "monte_carlo";
    case Method::SiteML: return "site_ml";
    case Method::SiteCAE: return "site_cae";
    case Method::SiteCWJ: return "site_cwj";
  }
  return "?";
}

SmootherKind parse_smoother(std::string_view name) {
  if (name == "ml") return SmootherKind::ML;
  if (name == "cae") return SmootherKind::CAE;
  if (name == "cwj") return SmootherKind::CWJ;
  throw InputError("unknown smoother '" + std::string(name) + "'");
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::MLExact, Method::MonteCarlo, Method::SiteML, Method::SiteCAE, Method::SiteCWJ})
    if (to_string(m) == name) return m;
  if (name == "ml") return Method::MLExact;
  if (name == "mc") return Method::MonteCarlo;
  if (name == "cae") return Method::SiteCAE;
  if (name == "cwj") return Method::SiteCWJ;
  throw InputError("unknown estimator '" + std::string(name) + "'");
}

Method site_method(SmootherKind k) {
  switch (k) {
    case SmootherKind::ML: return Method::SiteML;
    case SmootherKind::CAE: return Method::SiteCAE;
    case SmootherKind::CWJ: return Method::SiteCWJ;
  }
  return Method::SiteCWJ;
}

double ml_entropy(const FreqTable& t) {
  const double n = static_cast<double>(t.n());
  double h = 0.0;
  for (auto f : t.counts) {
    const double p = static_cast<double>(f) / n;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

GoodTuringProbs good_turing_probs(const FreqTable& t) {
  const double n = static_cast<double>(t.n());
  const std::uint64_t f1 = t.types_with_count(1);
  GoodTuringProbs out;
  out.fallback = f1 == t.n();
  const double coverage = out.fallback ? 1.0 : 1.0 - static_cast<double>(f1) / n;
  out.probs.reserve(t.counts.size());
  for (auto f : t.counts) out.probs.push_back(coverage * (static_cast<double>(f) / n));
  return out;
}

double cae_entropy(const FreqTable& t) {
  const auto gt = good_turing_probs(t);
  const double n = static_cast<double>(t.n());
  double h = 0.0;
  for (double p : gt.probs) {
    if (p <= 0.0 || p >= 1.0) continue;
    // 1 - (1 - p)^n, without cancellation for small p
    const double inclusion = -std::expm1(n * std::log1p(-p));
    h -= p * std::log2(p) / inclusion;
  }
  return h;
}

namespace {

// (1-A)^(1-n) * [-ln A - sum_{r=1}^{n-1} (1-A)^r / r], which equals the tail
// sum_{r>=n} (1-A)^(r+1-n) / r. The tail series is used when (1-A)^n is small
// and the bracket would cancel; the closed form otherwise.
double accumulation_tail(double a, std::uint64_t n) {
  const double x = 1.0 - a;
  if (x <= 0.0) return 0.0;
  const double nd = static_cast<double>(n);
  if (-std::log(x) * nd > 5.0) {
    double sum = 0.0;
    double power = x;  // x^(j+1)
    for (std::uint64_t j = 0;; ++j) {
      const double term = power / (nd + static_cast<double>(j));
      sum += term;
      if (term <= 1e-17 * sum) break;
      power *= x;
    }
    return sum;
  }
  double bracket = -std::log(a);
  double power = 1.0;
  for (std::uint64_t r = 1; r < n; ++r) {
    power *= x;
    bracket -= power / static_cast<double>(r);
  }
  return std::exp((1.0 - nd) * std::log(x)) * bracket;
}

}  // namespace

double cwj_entropy(const FreqTable& t) {
  const std::uint64_t n = t.n();
  const double nd = static_cast<double>(n);
  // harmonic[k] = sum_{j=1}^{k} 1/j
  std::vector<double> harmonic(n, 0.0);
  for (std::uint64_t k = 1; k < n; ++k) harmonic[k] = harmonic[k - 1] + 1.0 / static_cast<double>(k);

  double nats = 0.0;
  for (auto f : t.counts) {
    if (f >= n) continue;
    // sum_{k=f}^{n-1} 1/k
    nats += static_cast<double>(f) / nd * (harmonic[n - 1] - harmonic[f - 1]);
  }

  const double f1 = static_cast<double>(t.types_with_count(1));
  const double f2 = static_cast<double>(t.types_with_count(2));
  if (f1 > 0.0) {
    double a;
    if (f2 > 0.0) {
      a = 2.0 * f2 / ((nd - 1.0) * f1 + 2.0 * f2);
    } else {
      a = 2.0 / ((nd - 1.0) * (f1 - 1.0) + 2.0);
    }
    nats += f1 / nd * accumulation_tail(a, n);
  }
  return nats / std::numbers::ln2;
}

double smoothed_entropy(const FreqTable& t, SmootherKind k) {
  switch (k) {
    case SmootherKind::ML: return ml_entropy(t);
    case SmootherKind::CAE: return cae_entropy(t);
    case SmootherKind::CWJ: return cwj_entropy(t);
  }
  return ml_entropy(t);
}

double site(const Pcfg& g, SmootherKind k) {
  const auto tables = rule_freq_tables(g);
  Eigen::VectorXd h0(static_cast<Eigen::Index>(tables.size()));
  for (std::size_t a = 0; a < tables.size(); ++a) h0(static_cast<Eigen::Index>(a)) = smoothed_entropy(tables[a], k);
  return solve_system(characteristic_matrix(g), h0)(g.root());
}

EstimateResult site(const Corpus& c, SmootherKind k) {
  return {site(induce(c), k), site_method(k), c.sentence_count()};
}

EstimateResult monte_carlo_cross_entropy(const Corpus& train, const Corpus& test) {
  if (test.empty()) throw InputError("Monte Carlo estimate needs a non-empty test corpus");
  const Pcfg g = induce(train);
  std::vector<std::string> missing;
  double total = 0.0;
  for (const auto& t : test.sentences) {
    try {
      total += tree_probability(g, t).log2_probability;
    } catch (const OutOfGrammarError& e) {
      for (const auto& r : e.rules())
        if (std::find(missing.begin(), missing.end(), r) == missing.end()) missing.push_back(r);
    }
  }
  if (!missing.empty()) {
    std::string msg = "test trees use rules absent from the training grammar:";
    for (const auto& m : missing) msg += " [" + m + "]";
    throw OutOfGrammarError(msg, std::move(missing));
  }
  return {-total / static_cast<double>(test.sentence_count()), Method::MonteCarlo, train.sentence_count()};
}

double monte_carlo_cross_entropy(const Pcfg& g, const std::vector<std::uint64_t>& counts, std::size_t test_trees) {
  if (counts.size() != g.rules().size()) throw InputError("rule count vector does not match the grammar");
  if (test_trees == 0) throw InputError("Monte Carlo estimate needs at least one test tree");
  double total = 0.0;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (counts[r] == 0) continue;
    const double p = g.rules()[r].prob;
    if (!(p > 0.0)) throw OutOfGrammarError("test rule has zero probability: " + g.rule_string(r), {g.rule_string(r)});
    total += static_cast<double>(counts[r]) * std::log2(p);
  }
  return -total / static_cast<double>(test_trees);
}

}  // namespace sitekit
