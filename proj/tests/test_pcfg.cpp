#include "doctest.h"

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "sitekit/analysis.hpp"
#include "sitekit/entropy_exact.hpp"
#include "sitekit/errors.hpp"
#include "sitekit/pcfg.hpp"

using namespace sitekit;

namespace {

Corpus corpus_of(const std::string& text) {
  Corpus c;
  c.sentences = parse_bracketed(text);
  return c;
}

double prob_of(const Pcfg& g, const std::string& rule) {
  for (std::size_t i = 0; i < g.rules().size(); ++i)
    if (g.rule_string(i) == rule) return g.rules()[i].prob;
  FAIL("no rule " << rule);
  return 0.0;
}

}  // namespace

TEST_CASE("induce uses relative frequencies") {
  const Pcfg g = induce(corpus_of("(S (A a) (A b)) (S (A a))"));
  CHECK(g.root_label() == "S");
  CHECK(g.rules().size() == 4);
  CHECK(prob_of(g, "S -> A A") == doctest::Approx(0.5));
  CHECK(prob_of(g, "S -> A") == doctest::Approx(0.5));
  CHECK(prob_of(g, "A -> a") == doctest::Approx(2.0 / 3.0));
  CHECK(prob_of(g, "A -> b") == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("induce on a single sentence of the running example") {
  const Tree fig = preterminalize(parse_bracketed(
      "(S (NP-SBJ (PRP I)) (VP (VBP do) (RB n't) (VP (VB have) (NP (DT any) (NNS kids)))))")[0]);
  Corpus c;
  c.sentences = {fig};
  const Pcfg g = induce(c);
  // NP-SBJ and NP stay distinct; only VP has a choice (two rules at 1/2)
  CHECK(g.rules().size() == 5);
  CHECK(prob_of(g, "VP -> VB NP") == 0.5);
  CHECK(derivational_entropy(g) == doctest::Approx(2.0));
  CHECK(grammar_mlu(g) == doctest::Approx(6.0));
}

TEST_CASE("lexicalised induction gives the eleven rules of the example") {
  Corpus c;
  c.sentences = parse_bracketed(
      "(S (NP-SBJ (PRP I)) (VP (VBP do) (RB n't) (VP (VB have) (NP (DT any) (NNS kids)))))");
  const Pcfg g = induce(c);
  CHECK(g.rules().size() == 11);
  CHECK(g.nonterminals().size() == 10);
  for (const auto& r : g.rules()) {
    CHECK(r.freq == 1);
    // VP is the only symbol with two expansions
    CHECK(r.prob == (g.nonterminals()[r.lhs] == "VP" ? 0.5 : 1.0));
  }
  const auto tables = rule_freq_tables(g);
  for (std::size_t a = 0; a < tables.size(); ++a)
    CHECK(tables[a].counts.size() == (g.nonterminals()[a] == "VP" ? 2u : 1u));
}

TEST_CASE("mixed roots get a synthetic start symbol") {
  const Pcfg g = induce(corpus_of("(S a) (S b) (T c)"));
  CHECK(g.root_label() == std::string(kSyntheticRoot));
  CHECK(g.root() == 0);
  CHECK(prob_of(g, std::string(kSyntheticRoot) + " -> S") == doctest::Approx(2.0 / 3.0));
  CHECK(prob_of(g, std::string(kSyntheticRoot) + " -> T") == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("induce rejects overlapping alphabets and empty input") {
  CHECK_THROWS_AS(induce(corpus_of("(S (A a) (B A))")), InputError);
  CHECK_THROWS_AS(induce(corpus_of("(S (A a)) (S (a b))")), InputError);
  CHECK_THROWS_AS(induce(Corpus{}), InputError);
}

TEST_CASE("a failed add leaves the counter unchanged") {
  TreebankCounter counter;
  counter.add(parse_bracketed("(S (A a))")[0]);
  CHECK_THROWS(counter.add(parse_bracketed("(S (a A))")[0]));
  CHECK(counter.sentences() == 1);
  CHECK(counter.grammar().rules().size() == 2);
}

TEST_CASE("induce is invariant under sentence order") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Corpus c;
    const int n = oracle::uniform_int(rng, 1, 25);
    for (int i = 0; i < n; ++i) c.sentences.push_back(oracle::random_tree(rng, 4));
    Corpus shuffled = c;
    fisher_yates(shuffled.sentences, rng);
    const Pcfg a = induce(c), b = induce(shuffled);
    REQUIRE(a.rules().size() == b.rules().size());
    std::map<std::string, double> pa, pb;
    for (std::size_t i = 0; i < a.rules().size(); ++i) pa[a.rule_string(i)] = a.rules()[i].prob;
    for (std::size_t i = 0; i < b.rules().size(); ++i) pb[b.rule_string(i)] = b.rules()[i].prob;
    CHECK(pa == pb);
    CHECK(derivational_entropy(a) == doctest::Approx(derivational_entropy(b)).epsilon(1e-12));
  }
}

TEST_CASE("from_rules validation") {
  using R = Pcfg::RuleSpec;
  CHECK_NOTHROW(Pcfg::from_rules("S", {R{"S", {"a"}, 0.3, 0}, R{"S", {"b"}, 0.7, 0}}));
  CHECK_THROWS_AS(Pcfg::from_rules("S", {R{"S", {"a"}, 0.3, 0}, R{"S", {"b"}, 0.6, 0}}), InputError);
  CHECK_THROWS_AS(Pcfg::from_rules("S", {R{"S", {"a"}, 0.5, 0}, R{"S", {"a"}, 0.5, 0}}), InputError);
  CHECK_THROWS_AS(Pcfg::from_rules("X", {R{"S", {"a"}, 1.0, 0}}), InputError);
  CHECK_THROWS_AS(Pcfg::from_rules("S", {R{"S", {"a"}, 1.0, 0}, R{"T", {"S"}, 1.0, 0}, R{"T", {}, 0.0, 0}}),
                  InputError);
}

TEST_CASE("grammar text round trip") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Pcfg g = oracle::random_grammar(rng, 6);
    const Pcfg back = read_grammar(write_grammar(g));
    REQUIRE(back.rules().size() == g.rules().size());
    CHECK(back.root_label() == g.root_label());
    for (std::size_t i = 0; i < g.rules().size(); ++i) {
      CHECK(back.rule_string(i) == g.rule_string(i));
      CHECK(back.rules()[i].prob == g.rules()[i].prob);
    }
  }
  CHECK_THROWS_AS(read_grammar("0.5\t1\tS -> a\n"), ParseError);
  CHECK_THROWS_AS(read_grammar("#root S\nnot-a-number\t1\tS -> a\n"), ParseError);
  CHECK_THROWS_AS(read_grammar("#root S\n1\t1\tS a\n"), ParseError);
}

TEST_CASE("tree probability") {
  const Pcfg g = induce(corpus_of("(S (A a) (A b)) (S (A a))"));
  const auto p = tree_probability(g, parse_bracketed("(S (A a))")[0]);
  CHECK(p.probability == doctest::Approx(0.5 * 2.0 / 3.0));
  CHECK(p.log2_probability == doctest::Approx(std::log2(1.0 / 3.0)));
  CHECK_THROWS_AS(tree_probability(g, parse_bracketed("(S (A c))")[0]), OutOfGrammarError);
}

TEST_CASE("sampler draws derivations with the right frequencies") {
  // S -> A B (.5) | A (.3) | b (.2); A -> a (.6) | B (.4); B -> b
  const Pcfg g = read_grammar(
      "#root S\n0.5\t0\tS -> A B\n0.3\t0\tS -> A\n0.2\t0\tS -> b\n0.6\t0\tA -> a\n0.4\t0\tA -> B\n1\t0\tB -> b\n");
  std::map<std::string, double> expected{
      {"(S (A a) (B b))", 0.3}, {"(S (A (B b)) (B b))", 0.2}, {"(S (A a))", 0.18}, {"(S (A (B b)))", 0.12},
      {"(S b)", 0.2}};
  std::map<std::string, int> seen;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) seen[to_bracketed(sample(g, mix_seed(17, i)).tree)]++;
  CHECK(seen.size() == expected.size());
  double chi2 = 0.0;
  for (const auto& [tree, p] : expected) {
    const double e = p * draws;
    chi2 += (seen[tree] - e) * (seen[tree] - e) / e;
  }
  // 4 degrees of freedom; the 0.999 quantile is 18.47
  CHECK(chi2 < 18.47);
}

TEST_CASE("sampling is deterministic in the seed") {
  Rng rng(1);
  const Pcfg g = oracle::random_grammar(rng, 5);
  const Corpus a = sample_corpus(g, 50, 123), b = sample_corpus(g, 50, 123), c = sample_corpus(g, 50, 124);
  CHECK(a.sentences == b.sentences);
  CHECK_FALSE(a.sentences == c.sentences);
}

TEST_CASE("sampler gives up on divergent grammars") {
  const Pcfg g = read_grammar("#root S\n1\t0\tS -> S S\n");
  CHECK_THROWS_AS(sample(g, 1, 200), DivergenceError);
}

TEST_CASE("from_rule_counts matches re-induction of sampled trees") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Pcfg truth = oracle::random_grammar(rng, 5);
    if (spectral_radius(characteristic_matrix(truth)) > 0.9) continue;
    const Corpus c = sample_corpus(truth, 40, trial);
    std::vector<std::uint64_t> counts(truth.rules().size(), 0);
    for (const auto& t : c.sentences) count_rules(truth, t, counts);
    const Pcfg a = Pcfg::from_rule_counts(truth, counts);
    const Pcfg b = induce(c);
    REQUIRE(a.rules().size() == b.rules().size());
    std::map<std::string, double> pa, pb;
    for (std::size_t i = 0; i < a.rules().size(); ++i) pa[a.rule_string(i)] = a.rules()[i].prob;
    for (std::size_t i = 0; i < b.rules().size(); ++i) pb[b.rule_string(i)] = b.rules()[i].prob;
    CHECK(pa == pb);
    CHECK(derivational_entropy(a) == doctest::Approx(derivational_entropy(b)).epsilon(1e-12));
  }
}

TEST_CASE("frequency tables") {
  const FreqTable t({2, 1, 1, 5});
  CHECK(t.n() == 9);
  CHECK(t.types_with_count(1) == 2);
  CHECK(t.types_with_count(3) == 0);
  CHECK_THROWS_AS(FreqTable({1, 0}), InputError);

  const Pcfg g = induce(corpus_of("(S (A a) (A b)) (S (A a))"));
  const auto tables = rule_freq_tables(g);
  REQUIRE(tables.size() == 2);
  CHECK(tables[g.nonterminal_index("A").value()].n() == 3);
}
