"""Finite-domain expansion of top-level universal rules."""

from __future__ import annotations

from typing import Iterable, List

from .formula import (
    And,
    Atom,
    Const,
    ForAll,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    UnboundVariable,
    Var,
    check_closed,
)


class EmptyDomain(ValueError):
    pass


def substitute(f: Formula, var: str, constant: str) -> Formula:
    if isinstance(f, Atom):
        if not any(isinstance(a, Var) and a.name == var for a in f.args):
            return f
        return Atom(f.predicate, tuple(constant if isinstance(a, Var) and a.name == var else a for a in f.args))
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.operand, var, constant))
    if isinstance(f, (And, Or)):
        return type(f)([substitute(o, var, constant) for o in f.operands])
    if isinstance(f, (Implies, Iff)):
        return type(f)(substitute(f.left, var, constant), substitute(f.right, var, constant))
    if isinstance(f, ForAll):
        raise UnboundVariable("nested ForAll is not supported")
    raise TypeError(f"not a formula: {f!r}")


def _ordered(constants: Iterable[str]) -> List[str]:
    if isinstance(constants, (set, frozenset)):
        return sorted(constants)
    return list(dict.fromkeys(constants))


def ground(f: Formula, constants: Iterable[str]) -> List[Formula]:
    """Expand a top-level ``ForAll`` into one instance per constant.

    Quantifier-free formulas come back unchanged as a one-element list.
    Instances follow the iteration order of ``constants`` (sets are sorted).
    """
    if not isinstance(f, ForAll):
        check_closed(f)
        return [f]
    domain = _ordered(constants)
    if not domain:
        raise EmptyDomain(f"cannot ground {f} over an empty constant set")
    out = []
    for c in domain:
        g = substitute(f.body, f.variable, c)
        check_closed(g)
        out.append(g)
    return out


def ground_all(fs: Iterable[Formula], constants: Iterable[str]) -> List[Formula]:
    domain = _ordered(constants)
    out: List[Formula] = []
    for f in fs:
        out.extend(ground(f, domain))
    return out
