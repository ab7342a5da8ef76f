"""PCFG induction, derivational entropy and small-sample entropy estimators."""

from ._sitekit import (
    DivergenceError,
    Grammar,
    InputError,
    NumericalError,
    ParseError,
    SitekitError,
    StructuralError,
    cae_entropy,
    converge,
    convert,
    cwj_entropy,
    derivational_entropy,
    entropy_rate,
    fit,
    from_rules,
    grammar_mlu,
    induce,
    local_entropies,
    ml_entropy,
    nonterminal_entropies,
    read_grammar,
    residualize,
    sample,
    site,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
