import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from pacs.logic import Vocabulary, parse_formula
from pacs.sat import (
    InconsistentContext,
    Solver,
    TruthValue,
    VocabularyTooLarge,
    backbone_count,
    backbone_literals,
    is_satisfiable,
    model_count,
    score_state,
    solve_dimacs,
    to_dimacs,
    truth_value,
)


def P(*texts):
    return [parse_formula(t) for t in texts]


@pytest.mark.parametrize("state, expected", [
    (["Implies(a, b)"], (3, 2, 0, 7)),
    (["a", "Not(b)"], (1, 2, 2, 1)),
    (["a"], (1, 1, 1, 1)),
    (["Or(a, b, c)"], (7, 3, 0, 22)),
])
def test_score_examples(state, expected):
    assert score_state(P(*state)).as_tuple() == expected


def test_score_vocab_can_include_unconstrained_atoms():
    vocab = Vocabulary.from_formulas(P("Implies(a, b)", "c"))
    assert score_state(P("Implies(a, b)"), vocab).as_tuple() == (6, 3, 0, 19)


@pytest.mark.parametrize("query, state, expected", [
    ("b", ["a", "Implies(a, b)"], TruthValue.TRUE),
    ("b", ["Implies(a, b)"], TruthValue.UNKNOWN),
    ("b", ["a", "Implies(a, Not(b))"], TruthValue.FALSE),
    ("Implies(old_enough(her), walk_out_alone(her))", ["walk_out_alone(her)"], TruthValue.TRUE),
])
def test_truth_value_examples(query, state, expected):
    assert truth_value(parse_formula(query), P(*state)) is expected


def test_inconsistent_state_raises():
    with pytest.raises(InconsistentContext):
        truth_value(parse_formula("c"), P("a", "Not(a)"))
    assert not is_satisfiable(P("a", "Not(a)"))
    assert model_count(P("a", "Not(a)")) == 0


def test_truth_value_is_not_a_bool():
    with pytest.raises(TypeError):
        bool(TruthValue.UNKNOWN)


def test_backbone_literals_report_polarity():
    lits = dict((str(a), v) for a, v in backbone_literals(P("a", "Implies(a, Not(b))", "Or(c, d)")))
    assert lits == {"a": True, "b": False}
    assert backbone_count(P("a", "Implies(a, Not(b))", "Or(c, d)")) == 2


def test_vocabulary_cap():
    big = P(*[f"x{i}" for i in range(6)])
    with pytest.raises(VocabularyTooLarge):
        model_count(big, cap=5)


def test_state_atoms_must_be_in_vocabulary():
    with pytest.raises(ValueError):
        model_count(P("a", "b"), Vocabulary.from_formulas(P("a")))


def test_dimacs_round_trip():
    text = to_dimacs(P("Implies(a, b)", "a"))
    model = solve_dimacs(text)
    assert model is not None
    assert solve_dimacs("p cnf 1 2\n1 0\n-1 0\n") is None


def test_solver_assumptions_restore_root():
    s = Solver(2, [[1, 2], [-1, 2]])
    assert s.solve([-2]) is None
    assert s.solve() is not None
    assert s.count_projected([1, 2]) == 2


# -- properties against the truth-table oracle --------------------------------

states = st.lists(oracles.formulas(pool_size=6, max_leaves=8), min_size=1, max_size=3)


def _vocab(state, query=None):
    extra = [query] if query is not None else []
    return Vocabulary.from_formulas(state, extra)


@settings(max_examples=200, deadline=None)
@given(states, oracles.formulas(pool_size=6, max_leaves=6))
def test_truth_value_matches_oracle(state, query):
    vocab = _vocab(state, query)
    names = list(vocab.atoms)
    assume(oracles.count(state, names) > 0)
    assert truth_value(query, state, vocab) is oracles.truth(query, state, names)


@settings(max_examples=200, deadline=None)
@given(states)
def test_counts_match_oracle(state):
    vocab = _vocab(state)
    names = list(vocab.atoms)
    assert model_count(state, vocab) == oracles.count(state, names)
    if oracles.count(state, names):
        assert backbone_count(state, vocab) == oracles.backbone(state, names)
    else:
        with pytest.raises(InconsistentContext):
            backbone_count(state, vocab)


@settings(max_examples=150, deadline=None)
@given(states, oracles.formulas(pool_size=6, max_leaves=6))
def test_duality(state, query):
    from pacs.logic import Not
    vocab = _vocab(state, query)
    assume(is_satisfiable(state, vocab))
    flip = {TruthValue.TRUE: TruthValue.FALSE, TruthValue.FALSE: TruthValue.TRUE,
            TruthValue.UNKNOWN: TruthValue.UNKNOWN}
    assert truth_value(Not(query), state, vocab) is flip[truth_value(query, state, vocab)]


@settings(max_examples=150, deadline=None)
@given(states, oracles.formulas(pool_size=6, max_leaves=6), oracles.formulas(pool_size=6, max_leaves=6))
def test_decided_answers_survive_consistent_additions(state, extra, query):
    vocab = _vocab(state + [extra], query)
    assume(is_satisfiable(state + [extra], vocab))
    before = truth_value(query, state, vocab)
    after = truth_value(query, state + [extra], vocab)
    if before.decided:
        assert after is before


@settings(max_examples=150, deadline=None)
@given(states, oracles.formulas(pool_size=6, max_leaves=6))
def test_model_count_never_grows_when_adding(state, extra):
    vocab = _vocab(state + [extra])
    assert model_count(state + [extra], vocab) <= model_count(state, vocab)


@settings(max_examples=100, deadline=None)
@given(states)
def test_score_is_at_least_one(state):
    vocab = _vocab(state)
    assume(is_satisfiable(state, vocab))
    b = score_state(state, vocab)
    assert b.score >= 1
    assert b.score == b.model_count * (b.var_count - b.backbone_count) + 1


@settings(max_examples=60, deadline=None)
@given(states)
def test_numpy_oracle_agrees_with_plain_enumeration(state):
    names = list(_vocab(state).atoms)
    assert oracles.score(state, names) == oracles.naive_score_by_enumeration(state, names)
