"""Reader and canonical printer for the function-style formula syntax.

The surface grammar is the one used in prompts and dataset files::

    Implies(walk_out_alone(her), independent(her))
    And(a, Not(b))
    ForAll(x, Iff(professor(x), teacher(x)))

``render_formula`` is the inverse of ``parse_formula``: one space after
every comma, no other whitespace.
"""

from __future__ import annotations

import re
from typing import List, Optional, Tuple

from .formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Const,
    ForAll,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Var,
    check_closed,
)

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(\()|(\))|(,))")

_BINARY = {"Implies": Implies, "Iff": Iff}
_NARY = {"And": And, "Or": Or}
KEYWORDS = frozenset({"Implies", "Iff", "And", "Or", "Not", "True", "False", "ForAll"})


class FormulaSyntaxError(ValueError):
    """Raised for malformed formula text.

    ``position`` is a 0-based character offset into the input and
    ``expected`` a short hint of what would have been accepted there.
    """

    def __init__(self, message: str, position: int, expected: str = "", text: str = ""):
        self.position = position
        self.expected = expected
        self.text = text
        hint = f"; expected {expected}" if expected else ""
        super().__init__(f"{message} at position {position}{hint}")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        n = len(text)
        while pos < n:
            m = _TOKEN.match(text, pos)
            if m is None:
                if text[pos:].strip() == "":
                    break
                bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
                raise FormulaSyntaxError(
                    f"unexpected character {text[bad]!r}", bad, "identifier, '(', ')' or ','", text
                )
            start = m.start(m.lastindex)
            kind = ("ident", "(", ")", ",")[m.lastindex - 1]
            self.tokens.append((kind, m.group(m.lastindex), start))
            pos = m.end()
        self.i = 0
        self.bound: Optional[str] = None

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", len(self.text))

    def take(self, kind: str, expected: str):
        tok = self.peek()
        if tok[0] != kind:
            shown = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise FormulaSyntaxError(f"unexpected {shown}", tok[2], expected, self.text)
        self.i += 1
        return tok

    def formula(self, top: bool = False) -> Formula:
        kind, value, pos = self.take("ident", "a formula")
        if value == "True":
            return TRUE
        if value == "False":
            return FALSE
        if value == "ForAll":
            if not top:
                raise FormulaSyntaxError(
                    "ForAll is only allowed at the top level of a formula", pos, "", self.text
                )
            self.take("(", "'('")
            _, var, _ = self.take("ident", "a variable name")
            if var in KEYWORDS:
                raise FormulaSyntaxError(f"keyword {var!r} used as variable", pos, "", self.text)
            self.take(",", "','")
            self.bound = var
            body = self.formula()
            self.bound = None
            self.take(")", "')'")
            return ForAll(var, body)
        if value == "Not":
            self.take("(", "'(' after Not")
            inner = self.formula()
            self.take(")", "')'")
            return Not(inner)
        if value in _BINARY:
            self.take("(", f"'(' after {value}")
            left = self.formula()
            self.take(",", "','")
            right = self.formula()
            self.take(")", "')'")
            return _BINARY[value](left, right)
        if value in _NARY:
            self.take("(", f"'(' after {value}")
            ops = [self.formula()]
            while self.peek()[0] == ",":
                self.i += 1
                ops.append(self.formula())
            self.take(")", "',' or ')'")
            return _NARY[value](ops)
        # atom
        args = []
        if self.peek()[0] == "(":
            self.i += 1
            if self.peek()[0] != ")":
                args.append(self.term())
                while self.peek()[0] == ",":
                    self.i += 1
                    args.append(self.term())
            self.take(")", "',' or ')'")
        return Atom(value, tuple(args))

    def term(self):
        _, name, pos = self.take("ident", "a constant")
        if name in KEYWORDS:
            raise FormulaSyntaxError(f"keyword {name!r} used as argument", pos, "a constant", self.text)
        if name == self.bound:
            return Var(name)
        return name


def parse_formula(text: str) -> Formula:
    """Parse ``text`` into a :class:`Formula`.

    Raises
    ------
    FormulaSyntaxError
        On malformed input, with the offending position.
    """
    if not isinstance(text, str):
        raise TypeError(f"expected str, got {type(text).__name__}")
    reader = _Reader(text)
    f = reader.formula(top=True)
    tok = reader.peek()
    if tok[0] != "eof":
        raise FormulaSyntaxError(f"trailing input {tok[1]!r}", tok[2], "end of input", text)
    return f


def try_parse(text: str) -> Optional[Formula]:
    try:
        return parse_formula(text.strip())
    except (FormulaSyntaxError, ValueError):
        return None


def render_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.predicate
        return f"{f.predicate}({', '.join(str(a) for a in f.args)})"
    if isinstance(f, Const):
        return "True" if f.value else "False"
    if isinstance(f, Not):
        return f"Not({render_formula(f.operand)})"
    if isinstance(f, (And, Or)):
        return f"{type(f).__name__}({', '.join(render_formula(o) for o in f.operands)})"
    if isinstance(f, (Implies, Iff)):
        return f"{type(f).__name__}({render_formula(f.left)}, {render_formula(f.right)})"
    if isinstance(f, ForAll):
        return f"ForAll({f.variable}, {render_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


def render_closed(f: Formula) -> str:
    """Render after checking that no variable escapes its quantifier."""
    check_closed(f)
    return render_formula(f)
