"""ATL model checking and evaluation-game play over concurrent game models.

The package provides four semantics for alternating-time temporal logic
(standard compositional, unbounded game-theoretic, ordinal-bounded and
finitely bounded), a winning-time-label solver with canonical strategy
synthesis, and a step-by-step evaluation-game engine in which a human can
play either side against machine strategies.
"""

from atlgts.formula import parse_formula, print_formula
from atlgts.cgm import load_model, save_model
from atlgts.ordinal import Ordinal, parse_ordinal

__all__ = [
    "parse_formula",
    "print_formula",
    "load_model",
    "save_model",
    "Ordinal",
    "parse_ordinal",
]
