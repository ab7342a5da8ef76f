#include "doctest.h"

#include "oracles.hpp"
#include "sitekit/dep_convert.hpp"
#include "sitekit/pcfg.hpp"

using namespace sitekit;

namespace {

// "I do n't have any kids", all dependents of "do" except "any" <- "kids".
DepGraph fig2c() {
  DepGraph g;
  g.tokens = {{"I", "PRP"}, {"do", "VBP"}, {"n't", "RB"}, {"have", "VB"}, {"any", "DT"}, {"kids", "NNS"}};
  g.heads = {2, 0, 2, 2, 6, 2};
  g.labels = {"SBJ", "ROOT", "NEG", "VC", "NDET", "OBJ"};
  g.sent_id = "fig2c";
  return g;
}

DepGraph chain(std::vector<int> heads) {
  DepGraph g;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    g.tokens.push_back({"w" + std::to_string(i), "P" + std::to_string(i)});
    g.labels.push_back(heads[i] == 0 ? "root" : "dep");
  }
  g.heads = std::move(heads);
  return g;
}

}  // namespace

TEST_CASE("is_projective") {
  CHECK(is_projective(chain({2, 0, 2})));
  CHECK(is_projective(fig2c()));
  // 1 -> 3 and 2 -> 4 cross
  const DepGraph crossing = chain({0, 4, 1, 1});
  CHECK_FALSE(is_projective(crossing));
  CHECK_FALSE(crossing_arcs(crossing).empty());
  CHECK_FALSE(is_projective(chain({3, 0, 2})));
}

TEST_CASE("is_projective agrees with the crossing-arc characterisation") {
  Rng rng(5);
  int nonprojective = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = oracle::uniform_int(rng, 1, 8);
    // random tree: attach token i to a random earlier-processed token
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i + 1;
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[oracle::uniform_int(rng, 0, i)]);
    std::vector<int> heads(n, 0);
    for (int i = 1; i < n; ++i) heads[order[i] - 1] = order[oracle::uniform_int(rng, 0, i - 1)];
    const DepGraph g = chain(heads);
    const bool proj = is_projective(g);
    nonprojective += proj ? 0 : 1;
    CHECK(proj == crossing_arcs(g).empty());
  }
  CHECK(nonprojective > 0);
}

TEST_CASE("unlabeled conversion of the dependency example") {
  const Tree t = dep_to_tree(fig2c(), {.labeled = false, .use_pos = true});
  CHECK(to_bracketed(t) == "(ROOT (VBP (PRP PRP*) VBP* (RB RB*) (VB VB*) (NNS (DT DT*) NNS*)))");
}

TEST_CASE("labeled conversion of the dependency example") {
  const Tree t = dep_to_tree(fig2c(), {.labeled = true, .use_pos = true});
  CHECK(to_bracketed(t) ==
        "(ROOT (VBP (VBP/SBJ (PRP PRP*)) VBP* (VBP/NEG (RB RB*)) (VBP/VC (VB VB*)) "
        "(VBP/OBJ (NNS (NNS/NDET (DT DT*)) NNS*))))");
  std::size_t internal = 0;
  std::vector<const Tree*> stack{&t};
  while (!stack.empty()) {
    const Tree* n = stack.back();
    stack.pop_back();
    if (!n->is_leaf()) ++internal;
    for (const auto& c : n->children) stack.push_back(&c);
  }
  CHECK(internal == 12);
  CHECK(t.frontier_size() == 6);
}

TEST_CASE("word-form conversion") {
  const Tree t = dep_to_tree(fig2c(), {.labeled = false, .use_pos = false});
  CHECK(t.frontier() == std::vector<std::string>{"I*", "do*", "n't*", "have*", "any*", "kids*"});
}

TEST_CASE("single token") {
  DepGraph g;
  g.tokens = {{"dog", "NN"}};
  g.heads = {0};
  g.labels = {"root"};
  const Tree t = dep_to_tree(g);
  CHECK(to_bracketed(t) == "(ROOT (NN NN*))");
  const DepGraph back = tree_to_dep(t);
  CHECK(back.heads == g.heads);
  CHECK(back.tokens[0].pos == "NN");
}

TEST_CASE("tree_to_dep inverts the example") {
  const DepGraph g = fig2c();
  const DepGraph back = tree_to_dep(dep_to_tree(g));
  CHECK(back.heads == g.heads);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(back.tokens[i].pos == g.tokens[i].pos);
    if (g.heads[i] != 0) CHECK(back.labels[i] == g.labels[i]);
  }
}

TEST_CASE("tree_to_dep rejects trees of the wrong shape") {
  CHECK_THROWS_AS(tree_to_dep(parse_bracketed("(S (NP a))")[0]), StructuralError);
  CHECK_THROWS_AS(tree_to_dep(parse_bracketed("(ROOT (NN NN* NN*))")[0]), StructuralError);
  CHECK_THROWS_AS(tree_to_dep(parse_bracketed("(ROOT (NN (JJ JJ*) NN*))")[0]), StructuralError);
  CHECK_THROWS_AS(tree_to_dep(parse_bracketed("(ROOT (NN (NN/amod (JJ JJ*) (JJ JJ*)) NN*))")[0]),
                  StructuralError);
}

TEST_CASE("non-projective input is rejected with the crossing arcs") {
  const DepGraph g = chain({0, 4, 1, 1});
  try {
    dep_to_tree(g);
    FAIL("expected a conversion error");
  } catch (const NonProjectiveError& e) {
    REQUIRE_FALSE(e.crossings().empty());
    CHECK(std::string(e.what()).find("crosses") != std::string::npos);
  }
  const auto report = convert_treebank({fig2c(), g});
  CHECK(report.corpus.sentence_count() == 1);
  CHECK(report.skipped_nonprojective == 1);
}

TEST_CASE("random projective graphs round-trip and keep their frontier") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = oracle::uniform_int(rng, 1, 30);
    const DepGraph g = oracle::random_projective(rng, n);
    REQUIRE(is_projective(g));
    const Tree t = dep_to_tree(g);
    std::vector<std::string> expected;
    for (const auto& tok : g.tokens) expected.push_back(tok.pos + "*");
    CHECK(t.frontier() == expected);
    const DepGraph back = tree_to_dep(t);
    CHECK(back.heads == g.heads);
    for (int i = 0; i < n; ++i)
      if (g.heads[i] != 0) CHECK(back.labels[i] == g.labels[i]);
    // the unlabeled variant is a valid, disjoint-alphabet tree as well
    const Tree u = dep_to_tree(g, {.labeled = false});
    CHECK(u.frontier() == expected);
    Corpus c;
    c.sentences = {t, u};
    CHECK_NOTHROW(induce(c));
  }
}
