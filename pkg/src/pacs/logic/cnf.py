"""Tseitin encoding of grounded formulas.

Atoms of the vocabulary get variables ``1..len(vocab)`` in vocabulary order;
every connective gets a fresh auxiliary defined by a full equivalence, so
each satisfying assignment of the atoms extends to exactly one model of the
clause set. Projected counting relies on that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

from .formula import And, Atom, Const, ForAll, Formula, Iff, Implies, Not, Or, Vocabulary

Clause = Tuple[int, ...]


@dataclass(frozen=True)
class ClauseSet:
    clauses: Tuple[Clause, ...]
    num_vars: int
    num_original: int

    @property
    def original_vars(self) -> range:
        return range(1, self.num_original + 1)

    @property
    def aux_vars(self) -> range:
        return range(self.num_original + 1, self.num_vars + 1)

    def to_dimacs(self, comment: str = "") -> str:
        lines = [f"c {line}" for line in comment.splitlines()]
        lines.append(f"p cnf {self.num_vars} {len(self.clauses)}")
        lines.extend(" ".join(map(str, c)) + " 0" for c in self.clauses)
        return "\n".join(lines) + "\n"


class CnfBuilder:
    """Incremental Tseitin encoder over a fixed vocabulary."""

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        self.atom_var: Dict[Atom, int] = {a: i + 1 for i, a in enumerate(vocab.atoms)}
        self.num_original = len(vocab.atoms)
        self.num_vars = self.num_original
        self.clauses: List[Clause] = []
        self._memo: Dict[Formula, int] = {}
        self._true = 0

    def _fresh(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def _const(self, value: bool) -> int:
        if not self._true:
            self._true = self._fresh()
            self.clauses.append((self._true,))
        return self._true if value else -self._true

    def literal(self, f: Formula) -> int:
        """Literal equivalent to ``f`` under the definitions added so far."""
        if isinstance(f, Atom):
            try:
                return self.atom_var[f]
            except KeyError:
                raise KeyError(f"atom {f} is not in the vocabulary") from None
        if isinstance(f, Not):
            return -self.literal(f.operand)
        if isinstance(f, Const):
            return self._const(f.value)
        if isinstance(f, ForAll):
            raise ValueError("formulas must be grounded before CNF conversion")
        hit = self._memo.get(f)
        if hit is not None:
            return hit
        add = self.clauses.append
        if isinstance(f, (And, Or)):
            lits = [self.literal(o) for o in f.operands]
            if len(lits) == 1:
                self._memo[f] = lits[0]
                return lits[0]
            x = self._fresh()
            if isinstance(f, And):
                for lit in lits:
                    add((-x, lit))
                add((x,) + tuple(-lit for lit in lits))
            else:
                for lit in lits:
                    add((x, -lit))
                add((-x,) + tuple(lits))
        elif isinstance(f, Implies):
            a, b = self.literal(f.left), self.literal(f.right)
            x = self._fresh()
            add((-x, -a, b))
            add((x, a))
            add((x, -b))
        elif isinstance(f, Iff):
            a, b = self.literal(f.left), self.literal(f.right)
            x = self._fresh()
            add((-x, -a, b))
            add((-x, a, -b))
            add((x, a, b))
            add((x, -a, -b))
        else:
            raise TypeError(f"not a formula: {f!r}")
        self._memo[f] = x
        return x

    def assert_formula(self, f: Formula) -> None:
        if isinstance(f, And):
            for o in f.operands:
                self.assert_formula(o)
        elif isinstance(f, Const):
            if not f.value:
                self.clauses.append(())
        elif isinstance(f, Or):
            self.clauses.append(tuple(self.literal(o) for o in f.operands))
        elif isinstance(f, Implies):
            self.clauses.append((-self.literal(f.left), self.literal(f.right)))
        else:
            self.clauses.append((self.literal(f),))

    def build(self) -> ClauseSet:
        return ClauseSet(tuple(self.clauses), self.num_vars, self.num_original)


def to_cnf(fs: Iterable[Formula], vocab: Vocabulary = None) -> ClauseSet:
    """Equisatisfiable clause set for the conjunction of ``fs``.

    If ``vocab`` is omitted it is built from the atoms of ``fs``.
    """
    fs = list(fs)
    if vocab is None:
        vocab = Vocabulary.from_formulas(fs)
    builder = CnfBuilder(vocab)
    for f in fs:
        builder.assert_formula(f)
    return builder.build()


def encode_with_query(fs: Sequence[Formula], query: Formula, vocab: Vocabulary) -> Tuple[ClauseSet, int]:
    """Clause set for ``fs`` plus an unasserted literal standing for ``query``."""
    builder = CnfBuilder(vocab)
    for f in fs:
        builder.assert_formula(f)
    lit = builder.literal(query)
    return builder.build(), lit
