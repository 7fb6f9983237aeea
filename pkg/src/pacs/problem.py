from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

from .logic import Formula, Vocabulary, atoms, constants, ground_all, parse_formula, render_formula


@dataclass(frozen=True)
class ProblemInstance:
    """Premises ``S`` and query ``c``, with optional natural-language text.

    ``premises`` may contain top-level ``ForAll`` rules; ``grounded`` expands
    them over ``domain``.
    """

    premises: Tuple[Formula, ...]
    query: Formula
    constants: Tuple[str, ...] = ()
    premises_text: Tuple[str, ...] = ()
    query_text: str = ""
    id: str = ""
    label: Optional[bool] = None
    grounded: Tuple[Formula, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "premises", tuple(self.premises))
        object.__setattr__(self, "constants", tuple(self.constants))
        object.__setattr__(self, "premises_text", tuple(self.premises_text))
        object.__setattr__(self, "grounded", tuple(ground_all(self.premises, self.domain)))

    @classmethod
    def from_strings(cls, premises: Sequence[str], query: str, **kw) -> "ProblemInstance":
        return cls(tuple(parse_formula(p) for p in premises), parse_formula(query), **kw)

    @property
    def domain(self) -> Tuple[str, ...]:
        if self.constants:
            return self.constants
        seen = {}
        for f in (*self.premises, self.query):
            for c in constants(f):
                seen.setdefault(c)
        return tuple(seen)

    def vocabulary(self, extra: Iterable[Formula] = (), include_query: bool = True) -> Vocabulary:
        groups = [self.grounded, tuple(extra)]
        if include_query:
            groups.append((self.query,))
        return Vocabulary.from_formulas(*groups)

    @property
    def premises_block(self) -> str:
        lines = []
        for i, f in enumerate(self.premises):
            if i < len(self.premises_text) and self.premises_text[i]:
                lines.append(f"# {self.premises_text[i]}")
            lines.append(render_formula(f))
        return "\n".join(lines)

    def query_atoms(self):
        return tuple(atoms(self.query))
