import math

import pytest

import sitekit

TREES = """
(S (NP (DT the) (NN dog)) (VP (VBZ barks)))
(S (NP (PRP it)) (VP (VBZ runs) (NP (DT a) (NN race))))
"""

CONLLU = (
    "# sent_id = ok\n"
    "1\tI\tI\tPRON\tPRP\t_\t2\tSBJ\t_\t_\n"
    "2\tran\trun\tVERB\tVBD\t_\t0\tROOT\t_\t_\n"
    "\n"
    "# sent_id = crossing\n"
    "1\ta\ta\tX\tA\t_\t0\troot\t_\t_\n"
    "2\tb\tb\tX\tB\t_\t4\tdep\t_\t_\n"
    "3\tc\tc\tX\tC\t_\t1\tdep\t_\t_\n"
    "4\td\td\tX\tD\t_\t1\tdep\t_\t_\n"
    "\n"
)


def geometric(q):
    return sitekit.from_rules("S", [("S", ["a", "S"], q), ("S", ["a"], 1 - q)])


def test_induce_and_exact_quantities():
    g = sitekit.induce(TREES)
    assert g.root == "S"
    assert len(g) == len(g.rules)
    probs = {(lhs, tuple(rhs)): p for lhs, rhs, p, _ in g.rules}
    assert probs[("VP", ("VBZ",))] == pytest.approx(0.5)
    rate = sitekit.entropy_rate(g)
    assert rate["entropy"] == pytest.approx(sitekit.derivational_entropy(g))
    assert rate["mlu"] == pytest.approx(3.5)
    assert sitekit.site(g, "ml") == sitekit.derivational_entropy(g)
    assert sitekit.read_grammar(g.to_text()).to_text() == g.to_text()


def test_closed_form():
    q = 0.3
    hb = -q * math.log2(q) - (1 - q) * math.log2(1 - q)
    g = geometric(q)
    assert sitekit.derivational_entropy(g) == pytest.approx(hb / (1 - q), abs=1e-12)
    assert sitekit.grammar_mlu(g) == pytest.approx(1 / (1 - q), abs=1e-12)


def test_estimators():
    assert sitekit.ml_entropy([2, 2]) == pytest.approx(1.0)
    assert sitekit.cae_entropy([2, 2]) == pytest.approx(16 / 15)
    assert sitekit.cwj_entropy([2, 2]) == pytest.approx(5 / (6 * math.log(2)))


def test_sampling_is_deterministic():
    g = geometric(0.5)
    assert sitekit.sample(g, 5, seed=3) == sitekit.sample(g, 5, seed=3)
    assert all(t.startswith("(S") for t in sitekit.sample(g, 5))


def test_convert_and_errors():
    trees, skipped = sitekit.convert(CONLLU)
    assert trees == ["(ROOT (VBD (VBD/SBJ (PRP PRP*)) VBD*))"]
    assert skipped == ["crossing"]
    with pytest.raises(sitekit.ParseError):
        sitekit.induce("((S (X x))")
    with pytest.raises(ValueError):
        sitekit.induce("(S (A a))", format="xml")
    with pytest.raises(sitekit.DivergenceError):
        sitekit.derivational_entropy(sitekit.from_rules("S", [("S", ["S", "S"], 0.6), ("S", ["a"], 0.4)]))


def test_converge_and_fit():
    out = sitekit.converge(geometric(0.5), sizes=[5, 20], replications=4, seed=2, estimators=["ml_exact", "site_cwj"])
    assert out["true_entropy"] == pytest.approx(2.0)
    names = {row["estimator"] for row in out["rows"]}
    assert {"ml_exact", "site_cwj"} <= names
    f = sitekit.fit([1, 2, 3, 4], [2, 4.1, 5.9, 8], intercept=False)
    assert f["intercept"] is None
    assert f["slope"]["estimate"] == pytest.approx(2.0, abs=0.05)
    res = sitekit.residualize([1.0, 2.0, 2.5, 4.0], [0.0, 1.0, 2.0, 3.0])
    assert sum(res) == pytest.approx(0.0, abs=1e-9)
