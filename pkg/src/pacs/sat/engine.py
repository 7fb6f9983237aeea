"""Satisfiability, entailment, model counting and the search score.

All functions take a problem state as a sequence of grounded formulas and a
:class:`~pacs.logic.Vocabulary` fixing the variables being counted over.
Atoms of the vocabulary that no formula mentions are free variables.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

from ..logic import Formula, Vocabulary, atoms, encode_with_query, to_cnf
from ..logic.cnf import ClauseSet
from .solver import Solver

COUNT_CAP = 26


class InconsistentContext(ValueError):
    """The state has no model, so no truth value is defined."""


class VocabularyTooLarge(ValueError):
    pass


class TruthValue(enum.Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"

    def __bool__(self):
        raise TypeError("TruthValue has three values; compare explicitly")

    @classmethod
    def of(cls, answer: bool) -> "TruthValue":
        return cls.TRUE if answer else cls.FALSE

    @property
    def decided(self) -> bool:
        return self is not TruthValue.UNKNOWN


@dataclass(frozen=True)
class ScoreBreakdown:
    """Model count, variable count, backbone count and the combined score.

    ``score = model_count * (var_count - backbone_count) + 1``; lower means
    the state is closer to pinning every variable down.
    """

    model_count: int
    var_count: int
    backbone_count: int
    score: int

    @classmethod
    def from_counts(cls, model_count: int, var_count: int, backbone_count: int) -> "ScoreBreakdown":
        if not 0 <= backbone_count <= var_count:
            raise ValueError("backbone_count must lie in [0, var_count]")
        return cls(model_count, var_count, backbone_count, model_count * (var_count - backbone_count) + 1)

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.model_count, self.var_count, self.backbone_count, self.score)

    def as_dict(self) -> dict:
        return {"model_count": self.model_count, "var_count": self.var_count,
                "backbone_count": self.backbone_count, "score": self.score}


def _key(state: Sequence[Formula], vocab: Optional[Vocabulary]):
    state = tuple(state)
    if vocab is None:
        vocab = Vocabulary.from_formulas(state)
    else:
        known = set(vocab.atoms)
        for f in state:
            for a in atoms(f):
                if a not in known:
                    raise ValueError(f"atom {a} of the state is missing from the vocabulary")
    return state, vocab


@lru_cache(maxsize=8192)
def _cnf(state: Tuple[Formula, ...], vocab: Vocabulary) -> ClauseSet:
    return to_cnf(state, vocab)


def _solver(cnf: ClauseSet) -> Solver:
    return Solver(cnf.num_vars, cnf.clauses, priority=cnf.original_vars)


@lru_cache(maxsize=8192)
def _is_sat(state, vocab) -> bool:
    return _solver(_cnf(state, vocab)).solve() is not None


def is_satisfiable(state: Sequence[Formula], vocab: Vocabulary = None) -> bool:
    return _is_sat(*_key(state, vocab))


@lru_cache(maxsize=16384)
def _truth(c: Formula, state, vocab) -> TruthValue:
    cnf, lit = encode_with_query(state, c, vocab)
    solver = _solver(cnf)
    can_be_false = solver.solve([-lit]) is not None
    can_be_true = solver.solve([lit]) is not None
    if not can_be_false and not can_be_true:
        raise InconsistentContext("the state is unsatisfiable")
    if not can_be_false:
        return TruthValue.TRUE
    if not can_be_true:
        return TruthValue.FALSE
    return TruthValue.UNKNOWN


def truth_value(c: Formula, state: Sequence[Formula], vocab: Vocabulary = None) -> TruthValue:
    """Three-valued truth of ``c`` in the context ``state``.

    ``TRUE`` when ``state`` entails ``c``, ``FALSE`` when it entails ``Not(c)``,
    ``UNKNOWN`` otherwise. Raises :class:`InconsistentContext` when ``state``
    has no model.
    """
    state, vocab = _key(state, vocab)
    vocab = vocab.extend([c])
    return _truth(c, state, vocab)


def _check_cap(vocab: Vocabulary, cap: int) -> None:
    if len(vocab.atoms) > cap:
        raise VocabularyTooLarge(f"{len(vocab.atoms)} variables exceed the counting cap of {cap}")


@lru_cache(maxsize=8192)
def _count(state, vocab) -> int:
    cnf = _cnf(state, vocab)
    return _solver(cnf).count_projected(cnf.original_vars)


def model_count(state: Sequence[Formula], vocab: Vocabulary = None, cap: int = COUNT_CAP) -> int:
    """Number of assignments to ``vocab.atoms`` satisfying every formula."""
    state, vocab = _key(state, vocab)
    _check_cap(vocab, cap)
    return _count(state, vocab)


@lru_cache(maxsize=8192)
def _backbone(state, vocab) -> Tuple[int, ...]:
    cnf = _cnf(state, vocab)
    solver = _solver(cnf)
    model = solver.solve()
    if model is None:
        raise InconsistentContext("the state is unsatisfiable")
    candidates = set(cnf.original_vars)
    fixed = []
    for v in cnf.original_vars:
        if v not in candidates:
            continue
        lit = v if model[v] else -v
        other = solver.solve([-lit])
        if other is None:
            fixed.append(lit)
            continue
        candidates -= {u for u in candidates if other[u] != model[u]}
    return tuple(fixed)


def backbone_literals(state: Sequence[Formula], vocab: Vocabulary = None) -> Tuple[Tuple[Formula, bool], ...]:
    """Vocabulary atoms forced to one value in every model, with that value."""
    state, vocab = _key(state, vocab)
    return tuple((vocab.atoms[abs(lit) - 1], lit > 0) for lit in _backbone(state, vocab))


def backbone_count(state: Sequence[Formula], vocab: Vocabulary = None) -> int:
    return len(_backbone(*_key(state, vocab)))


def score_state(state: Sequence[Formula], vocab: Vocabulary = None, cap: int = COUNT_CAP) -> ScoreBreakdown:
    state, vocab = _key(state, vocab)
    _check_cap(vocab, cap)
    n_models = _count(state, vocab)
    if n_models == 0:
        raise InconsistentContext("cannot score an unsatisfiable state")
    return ScoreBreakdown.from_counts(n_models, len(vocab.atoms), len(_backbone(state, vocab)))


def to_dimacs(state: Sequence[Formula], vocab: Vocabulary = None) -> str:
    state, vocab = _key(state, vocab)
    cnf = _cnf(state, vocab)
    names = "\n".join(f"{i + 1} {a}" for i, a in enumerate(vocab.atoms))
    return cnf.to_dimacs(names)


def clear_caches() -> None:
    for fn in (_cnf, _is_sat, _truth, _count, _backbone):
        fn.cache_clear()
