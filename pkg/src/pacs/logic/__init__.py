from .cnf import ClauseSet, CnfBuilder, encode_with_query, to_cnf
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
    UnboundVariable,
    Var,
    Vocabulary,
    atoms,
    check_closed,
    conjoin,
    constants,
    free_variables,
    is_ground,
)
from .grounding import EmptyDomain, ground, ground_all
from .parser import FormulaSyntaxError, parse_formula, render_formula, try_parse

__all__ = [
    "And", "Atom", "ClauseSet", "CnfBuilder", "Const", "EmptyDomain", "FALSE", "ForAll",
    "Formula", "FormulaSyntaxError", "Iff", "Implies", "Not", "Or", "TRUE", "UnboundVariable",
    "Var", "Vocabulary", "atoms", "check_closed", "conjoin", "constants", "encode_with_query", "free_variables",
    "ground", "ground_all", "is_ground", "parse_formula", "render_formula", "to_cnf", "try_parse",
]
