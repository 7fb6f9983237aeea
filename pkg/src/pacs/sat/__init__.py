from .engine import (
    COUNT_CAP,
    InconsistentContext,
    ScoreBreakdown,
    TruthValue,
    VocabularyTooLarge,
    backbone_count,
    backbone_literals,
    clear_caches,
    is_satisfiable,
    model_count,
    score_state,
    to_dimacs,
    truth_value,
)
from .solver import Solver, solve_dimacs

__all__ = [
    "COUNT_CAP", "InconsistentContext", "ScoreBreakdown", "Solver", "TruthValue",
    "VocabularyTooLarge", "backbone_count", "backbone_literals", "clear_caches",
    "is_satisfiable", "model_count", "score_state", "solve_dimacs", "to_dimacs", "truth_value",
]
