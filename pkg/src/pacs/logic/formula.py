"""Immutable formula tree for ground-predicate propositional logic."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Tuple, Union

IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class UnboundVariable(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    """A variable bound by an enclosing ``ForAll``."""

    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[str, Var]


class Formula:
    """Base class of all formula nodes.

    Nodes are frozen dataclasses, so structural equality and hashing come for
    free. ``str(f)`` is the canonical rendering.
    """

    __slots__ = ()

    def __str__(self) -> str:
        from .parser import render_formula

        return render_formula(self)

    def children(self) -> Tuple["Formula", ...]:
        return ()


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    predicate: str
    args: Tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not IDENTIFIER.match(self.predicate):
            raise ValueError(f"invalid predicate name {self.predicate!r}")
        args = tuple(self.args)
        for a in args:
            name = a.name if isinstance(a, Var) else a
            if not isinstance(name, str) or not IDENTIFIER.match(name):
                raise ValueError(f"invalid argument {a!r} in atom {self.predicate}")
        object.__setattr__(self, "args", args)

    def __repr__(self) -> str:
        return f"Atom({str(self)!r})"


@dataclass(frozen=True, repr=False)
class Not(Formula):
    operand: Formula

    def children(self):
        return (self.operand,)

    def __repr__(self) -> str:
        return f"Not({self.operand!r})"


@dataclass(frozen=True, repr=False)
class _NAry(Formula):
    operands: Tuple[Formula, ...]

    def __init__(self, *operands) -> None:
        if len(operands) == 1 and not isinstance(operands[0], Formula):
            operands = tuple(operands[0])
        if not operands:
            raise ValueError(f"{type(self).__name__} needs at least one operand")
        object.__setattr__(self, "operands", tuple(operands))

    def children(self):
        return self.operands

    def __repr__(self) -> str:
        return f"{type(self).__name__}({', '.join(map(repr, self.operands))})"


class And(_NAry):
    pass


class Or(_NAry):
    pass


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def __repr__(self) -> str:
        return f"Implies({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Iff(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def __repr__(self) -> str:
        return f"Iff({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Const(Formula):
    value: bool

    def __repr__(self) -> str:
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True, repr=False)
class ForAll(Formula):
    variable: str
    body: Formula

    def __post_init__(self) -> None:
        if not IDENTIFIER.match(self.variable):
            raise ValueError(f"invalid variable name {self.variable!r}")

    def children(self):
        return (self.body,)

    def __repr__(self) -> str:
        return f"ForAll({self.variable!r}, {self.body!r})"


def iter_nodes(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def atoms(f: Formula) -> Iterator[Atom]:
    """Atoms of ``f`` in order of first appearance (left to right)."""
    seen = set()
    for node in iter_nodes(f):
        if isinstance(node, Atom) and node not in seen:
            seen.add(node)
            yield node


def constants(f: Formula) -> Iterator[str]:
    seen = set()
    for a in atoms(f):
        for arg in a.args:
            if isinstance(arg, str) and arg not in seen:
                seen.add(arg)
                yield arg


def free_variables(f: Formula, bound: frozenset = frozenset()) -> set:
    if isinstance(f, Atom):
        return {a.name for a in f.args if isinstance(a, Var) and a.name not in bound}
    if isinstance(f, ForAll):
        return free_variables(f.body, bound | {f.variable})
    out = set()
    for c in f.children():
        out |= free_variables(c, bound)
    return out


def is_ground(f: Formula) -> bool:
    return not any(isinstance(n, ForAll) for n in iter_nodes(f)) and not free_variables(f)


def check_closed(f: Formula) -> None:
    free = free_variables(f)
    if free:
        raise UnboundVariable(f"unbound variable(s) {sorted(free)} outside ForAll")


def conjoin(fs: Iterable[Formula]) -> Formula:
    fs = tuple(fs)
    if not fs:
        return TRUE
    return fs[0] if len(fs) == 1 else And(fs)


@dataclass(frozen=True)
class Vocabulary:
    """Ordered, duplicate-free atom universe of a problem state."""

    atoms: Tuple[Atom, ...] = ()
    constants: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        atoms_ = tuple(dict.fromkeys(self.atoms))
        object.__setattr__(self, "atoms", atoms_)
        consts = dict.fromkeys(self.constants)
        for a in atoms_:
            for arg in a.args:
                if isinstance(arg, str):
                    consts.setdefault(arg)
        object.__setattr__(self, "constants", tuple(consts))

    @classmethod
    def from_formulas(cls, *groups: Iterable[Formula]) -> "Vocabulary":
        ordered = {}
        for group in groups:
            if isinstance(group, Formula):
                group = (group,)
            for f in group:
                for a in atoms(f):
                    ordered.setdefault(a)
        return cls(tuple(ordered))

    def extend(self, fs: Iterable[Formula]) -> "Vocabulary":
        return Vocabulary.from_formulas(self.atoms, fs) if fs else self

    def __len__(self) -> int:
        return len(self.atoms)

    def __contains__(self, atom) -> bool:
        return atom in self.atoms

    def index(self, atom: Atom) -> int:
        return self.atoms.index(atom)
