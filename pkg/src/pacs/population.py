"""Explicit finite reasoner populations and exact computations over them.

A population fixes the proposition list, a set of weighted belief vectors
and the problem they answer. Everything here is enumerable, so chain-rule
sampling, early stopping and the ordering MDP can be checked with exact
rational arithmetic; only the Monte-Carlo samplers use floats.

Partial states are tuples with one slot per proposition: ``None`` for a
proposition not drawn yet, otherwise the drawn :class:`Epistemic` value.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .logic import TRUE, Formula, Not, parse_formula, render_formula
from .problem import ProblemInstance
from .sat import InconsistentContext, TruthValue, is_satisfiable, score_state, truth_value


class Epistemic(enum.Enum):
    KNOW = "know"
    KNOW_NOT = "know_not"
    UNKNOWN = "unknown"


BeliefVector = Tuple[Epistemic, ...]
PartialState = Tuple[Optional[Epistemic], ...]


class InvalidPopulation(ValueError):
    pass


class ImpossibleCondition(ValueError):
    """The revealed beliefs match no reasoner, so conditionals are undefined."""


class EquivalenceViolation(AssertionError):
    def __init__(self, message: str, beliefs=None):
        self.beliefs = beliefs
        super().__init__(message)


def belief_formula(prop: Formula, value: Optional[Epistemic]) -> Optional[Formula]:
    if value is Epistemic.KNOW:
        return prop
    if value is Epistemic.KNOW_NOT:
        return Not(prop)
    return None


def _fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, float):
        return Fraction(repr(w))
    return Fraction(w)


@dataclass(frozen=True)
class Reasoner:
    beliefs: BeliefVector
    weight: Fraction
    name: str = ""


def to_epistemic(v) -> Epistemic:
    if isinstance(v, Epistemic):
        return v
    return Epistemic(str(v).lower())


class ReasonerPopulation:
    """Weighted belief vectors over an ordered proposition list."""

    def __init__(self, problem: ProblemInstance, propositions: Sequence[Union[Formula, str]],
                 reasoners: Iterable, name: str = ""):
        self.problem = problem
        self.name = name or problem.id
        self.propositions: Tuple[Formula, ...] = tuple(
            parse_formula(p) if isinstance(p, str) else p for p in propositions)
        rs = []
        for r in reasoners:
            if not isinstance(r, Reasoner):
                beliefs, weight = r[0], r[1]
                r = Reasoner(tuple(to_epistemic(b) for b in beliefs), _fraction(weight))
            rs.append(r)
        self.reasoners: Tuple[Reasoner, ...] = tuple(rs)
        self._truth_memo: Dict[tuple, TruthValue] = {}
        self._cond_memo: Dict[tuple, Dict[Epistemic, Fraction]] = {}
        self.memo: Dict[tuple, object] = {}
        self._validate()

    def __repr__(self):
        return f"ReasonerPopulation({self.name!r}, {len(self.propositions)} propositions, {len(self.reasoners)} reasoners)"

    @property
    def size(self) -> int:
        return len(self.propositions)

    def _validate(self) -> None:
        if not self.reasoners:
            raise InvalidPopulation("population is empty")
        total = sum(r.weight for r in self.reasoners)
        if abs(float(total) - 1.0) > 1e-9:
            raise InvalidPopulation(f"weights sum to {float(total)}, not 1")
        for r in self.reasoners:
            if r.weight <= 0:
                raise InvalidPopulation("weights must be positive")
            if len(r.beliefs) != self.size:
                raise InvalidPopulation(f"belief vector of length {len(r.beliefs)} for {self.size} propositions")
            state = self.state(r.beliefs)
            if not is_satisfiable(state, self.problem.vocabulary(state)):
                raise InvalidPopulation(f"beliefs {self.describe(r.beliefs)} contradict the premises")
            if not self.truth(r.beliefs).decided:
                raise InvalidPopulation(f"beliefs {self.describe(r.beliefs)} do not decide the query")

    # -- logic views --------------------------------------------------------
    def literals(self, partial: PartialState) -> List[Formula]:
        out = []
        for prop, v in zip(self.propositions, partial):
            f = belief_formula(prop, v)
            if f is not None:
                out.append(f)
        return out

    def state(self, partial: PartialState) -> List[Formula]:
        return list(self.problem.grounded) + self.literals(partial)

    def _held(self, partial: PartialState) -> tuple:
        return tuple((i, v) for i, v in enumerate(partial) if v in (Epistemic.KNOW, Epistemic.KNOW_NOT))

    def truth(self, partial: PartialState) -> TruthValue:
        key = self._held(partial)
        hit = self._truth_memo.get(key)
        if hit is None:
            state = self.state(partial)
            hit = truth_value(self.problem.query, state, self.problem.vocabulary(state))
            self._truth_memo[key] = hit
        return hit

    def score(self, partial: PartialState, include_query: bool = True):
        state = self.state(partial)
        return score_state(state, self.problem.vocabulary(state, include_query=include_query))

    def describe(self, partial: PartialState) -> str:
        parts = []
        for prop, v in zip(self.propositions, partial):
            if v is not None:
                parts.append(f"{v.value}:{render_formula(prop)}")
        return "{" + ", ".join(parts) + "}"

    # -- probability ------------------------------------------------------
    def empty_state(self) -> PartialState:
        return (None,) * self.size

    def matches(self, r: Reasoner, partial: PartialState) -> bool:
        return all(v is None or v is b for v, b in zip(partial, r.beliefs))

    def support(self, partial: PartialState) -> List[Reasoner]:
        return [r for r in self.reasoners if self.matches(r, partial)]

    def conditional(self, partial: PartialState, index: int) -> Dict[Epistemic, Fraction]:
        """Exact ``p(L_index = e | revealed entries of partial)``."""
        key = (partial, index)
        hit = self._cond_memo.get(key)
        if hit is not None:
            return hit
        sup = self.support(partial)
        mass = sum(r.weight for r in sup)
        if not sup:
            raise ImpossibleCondition(f"no reasoner holds {self.describe(partial)}")
        dist: Dict[Epistemic, Fraction] = {}
        for e in Epistemic:
            w = sum(r.weight for r in sup if r.beliefs[index] is e)
            if w:
                dist[e] = w / mass
        self._cond_memo[key] = dist
        return dist

    def distribution(self) -> Dict[BeliefVector, Fraction]:
        out: Dict[BeliefVector, Fraction] = {}
        for r in self.reasoners:
            out[r.beliefs] = out.get(r.beliefs, Fraction(0)) + r.weight
        return out

    def exact_ap(self) -> Fraction:
        return sum((r.weight for r in self.reasoners if self.truth(r.beliefs) is TruthValue.TRUE), Fraction(0))

    def to_dict(self) -> dict:
        return {
            "propositions": [render_formula(p) for p in self.propositions],
            "reasoners": [{"beliefs": [b.value for b in r.beliefs], "weight": str(r.weight)}
                          for r in self.reasoners],
        }

    @classmethod
    def from_dict(cls, problem: ProblemInstance, data: dict, name: str = "") -> "ReasonerPopulation":
        reasoners = [(r["beliefs"], r["weight"]) for r in data["reasoners"]]
        return cls(problem, data["propositions"], reasoners, name=name or data.get("name", ""))


# -- ordering policies ------------------------------------------------------

class OrderingPolicy:
    """Chooses which undrawn proposition to sample next.

    Subclasses must be deterministic functions of the partial state, or the
    early-stopped map from full vectors to partial ones is ill-defined.
    """

    name = "policy"

    def choose(self, partial: PartialState, pop: ReasonerPopulation) -> int:
        raise NotImplementedError

    def __call__(self, partial, pop):
        return self.choose(partial, pop)

    def __repr__(self):
        return self.name


class FixedOrder(OrderingPolicy):
    def __init__(self, permutation: Sequence[int], name: str = ""):
        self.permutation = tuple(permutation)
        self.name = name or f"fixed{list(self.permutation)}"

    def choose(self, partial, pop):
        for i in self.permutation:
            if partial[i] is None:
                return i
        for i, v in enumerate(partial):
            if v is None:
                return i
        raise ValueError("every proposition has been drawn")


def forward_order(pop: ReasonerPopulation) -> FixedOrder:
    return FixedOrder(range(pop.size), "forward")


def reverse_order(pop: ReasonerPopulation) -> FixedOrder:
    return FixedOrder(range(pop.size - 1, -1, -1), "reverse")


class RandomOrder(FixedOrder):
    """A permutation drawn once from ``seed`` and then held fixed."""

    def __init__(self, seed: int, size: int):
        perm = list(range(size))
        random.Random(seed).shuffle(perm)
        super().__init__(perm, f"random(seed={seed})")
        self.seed = seed


class GreedyScore(OrderingPolicy):
    """Pick the proposition whose draw minimises the expected search score.

    Outcomes that already decide the query cost nothing, since the search
    stops there. Ties go to the lowest index.
    """

    def __init__(self, include_query: bool = True):
        self.include_query = include_query
        self.name = "greedy-score"

    def expected_score(self, partial, index, pop) -> Fraction:
        total = Fraction(0)
        for e, p in pop.conditional(partial, index).items():
            nxt = partial[:index] + (e,) + partial[index + 1:]
            if pop.truth(nxt).decided:
                continue
            total += p * pop.score(nxt, self.include_query).score
        return total

    def choose(self, partial, pop):
        key = ("greedy", self.include_query, partial)
        hit = pop.memo.get(key)
        if hit is None:
            options = [i for i, v in enumerate(partial) if v is None]
            if not options:
                raise ValueError("every proposition has been drawn")
            hit = min(options, key=lambda i: (self.expected_score(partial, i, pop), i))
            pop.memo[key] = hit
        return hit


class Optimal(OrderingPolicy):
    def __init__(self, solution: "MdpSolution"):
        self.solution = solution
        self.name = "optimal"

    def choose(self, partial, pop):
        return self.solution.policy[partial]


# -- rollouts ---------------------------------------------------------------

@dataclass(frozen=True)
class EarlyStopped:
    partial: PartialState
    stop_time: int
    verdict: TruthValue

    @property
    def answer(self) -> bool:
        return self.verdict is TruthValue.TRUE


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, tuple):
        return np.random.default_rng(np.random.SeedSequence(entropy=seed[0], spawn_key=tuple(seed[1:])))
    return np.random.default_rng(seed)


def draw(dist: Dict[Epistemic, Fraction], rng: np.random.Generator) -> Epistemic:
    u = rng.random()
    acc = 0.0
    last = None
    for e in Epistemic:
        p = dist.get(e)
        if p is None:
            continue
        acc += float(p)
        last = e
        if u < acc:
            return e
    return last


def _set(partial: PartialState, i: int, e: Epistemic) -> PartialState:
    return partial[:i] + (e,) + partial[i + 1:]


def early_stopped_map(pop: ReasonerPopulation, phi: OrderingPolicy, beliefs: BeliefVector) -> EarlyStopped:
    """The deterministic early-stopped version of a full belief vector."""
    partial = pop.empty_state()
    t = 0
    while True:
        tv = pop.truth(partial)
        if tv.decided:
            return EarlyStopped(partial, t, tv)
        if t == pop.size:
            raise InvalidPopulation(f"{pop.describe(partial)} never decides the query")
        i = phi.choose(partial, pop)
        if partial[i] is not None:
            raise ValueError(f"policy {phi!r} chose already-drawn proposition {i}")
        partial = _set(partial, i, beliefs[i])
        t += 1


def sample_full(pop: ReasonerPopulation, phi: OrderingPolicy, seed=None) -> BeliefVector:
    """Draw every proposition in ``phi`` order from the exact conditionals."""
    rng = make_rng(seed)
    partial = pop.empty_state()
    for _ in range(pop.size):
        i = phi.choose(partial, pop)
        partial = _set(partial, i, draw(pop.conditional(partial, i), rng))
    return partial


def sample_early_stopped(pop: ReasonerPopulation, phi: OrderingPolicy, seed=None) -> EarlyStopped:
    rng = make_rng(seed)
    partial = pop.empty_state()
    t = 0
    while True:
        tv = pop.truth(partial)
        if tv.decided:
            return EarlyStopped(partial, t, tv)
        i = phi.choose(partial, pop)
        partial = _set(partial, i, draw(pop.conditional(partial, i), rng))
        t += 1


def chain_rule_distribution(pop: ReasonerPopulation, phi: OrderingPolicy,
                            early_stop: bool = True) -> Dict[PartialState, Fraction]:
    """Exact distribution of the chain-rule sampler's output, by enumeration."""
    out: Dict[PartialState, Fraction] = {}

    def walk(partial: PartialState, prob: Fraction, t: int) -> None:
        if (early_stop and pop.truth(partial).decided) or t == pop.size:
            out[partial] = out.get(partial, Fraction(0)) + prob
            return
        i = phi.choose(partial, pop)
        for e, p in pop.conditional(partial, i).items():
            walk(_set(partial, i, e), prob * p, t + 1)

    walk(pop.empty_state(), Fraction(1), 0)
    return out


@dataclass
class EquivalenceReport:
    population: str
    policy: str
    full_truth_mass: Fraction
    early_truth_mass: Fraction
    process_truth_mass: Fraction
    outcomes: int
    ok: bool = True

    def as_dict(self) -> dict:
        return {"population": self.population, "policy": self.policy,
                "ap_full": str(self.full_truth_mass), "ap_early_stopped": str(self.early_truth_mass),
                "ap_process": str(self.process_truth_mass), "outcomes": self.outcomes, "ok": self.ok}


def verify_equivalence(pop: ReasonerPopulation, phi: OrderingPolicy) -> EquivalenceReport:
    """Check that early stopping under ``phi`` preserves the verdict distribution.

    Three quantities must agree exactly: the weighted fraction of full belief
    vectors entailing the query, the same sum over their early-stopped
    versions grouped by outcome, and the mass of query-entailing outcomes of
    the early-stopped chain-rule process enumerated from its conditionals.
    The grouped and enumerated outcome distributions must also be identical.
    """
    if pop.size > 6:
        raise ValueError("exact verification is limited to 6 propositions")
    grouped: Dict[PartialState, Fraction] = {}
    full = Fraction(0)
    for r in pop.reasoners:
        first = early_stopped_map(pop, phi, r.beliefs)
        again = early_stopped_map(pop, phi, r.beliefs)
        if first != again:
            raise EquivalenceViolation(
                f"policy {phi!r} maps {pop.describe(r.beliefs)} to different early-stopped states", r.beliefs)
        if first.partial != tuple(v if v is None else b for v, b in zip(first.partial, r.beliefs)):
            raise EquivalenceViolation("early-stopped state disagrees with its source vector", r.beliefs)
        if first.verdict is not pop.truth(r.beliefs):
            raise EquivalenceViolation(
                f"early stop at {pop.describe(first.partial)} contradicts the full verdict", r.beliefs)
        grouped[first.partial] = grouped.get(first.partial, Fraction(0)) + r.weight
        if pop.truth(r.beliefs) is TruthValue.TRUE:
            full += r.weight
    early = sum((p for s, p in grouped.items() if pop.truth(s) is TruthValue.TRUE), Fraction(0))
    process = chain_rule_distribution(pop, phi)
    process_mass = sum((p for s, p in process.items() if pop.truth(s) is TruthValue.TRUE), Fraction(0))
    if process != grouped:
        bad = next(iter(set(process) ^ set(grouped)), None)
        if bad is None:
            bad = next(s for s in grouped if grouped[s] != process[s])
        raise EquivalenceViolation(
            f"chain-rule process and early-stopped map disagree at {pop.describe(bad)}", bad)
    if not full == early == process_mass:
        raise EquivalenceViolation(f"truth mass {full} vs {early} vs {process_mass}")
    return EquivalenceReport(pop.name, phi.name, full, early, process_mass, len(grouped))


# -- the ordering MDP -------------------------------------------------------

@dataclass
class MdpSolution:
    value: Dict[PartialState, Fraction]
    policy: Dict[PartialState, int]
    root: PartialState
    sweeps: int = 0
    residual: Fraction = field(default=Fraction(0))

    @property
    def root_value(self) -> Fraction:
        return self.value[self.root]


def _successors(pop, partial, i):
    return [(p, _set(partial, i, e)) for e, p in pop.conditional(partial, i).items()]


def reachable_states(pop: ReasonerPopulation) -> List[PartialState]:
    root = pop.empty_state()
    seen = {root: None}
    frontier = [root]
    while frontier:
        nxt = []
        for s in frontier:
            if pop.truth(s).decided:
                continue
            for i, v in enumerate(s):
                if v is None:
                    for _, t in _successors(pop, s, i):
                        if t not in seen:
                            seen[t] = None
                            nxt.append(t)
        frontier = nxt
    return list(seen)


def _q(pop, s, i, value) -> Fraction:
    return 1 + sum((p * value[t] for p, t in _successors(pop, s, i)), Fraction(0))


def value_iteration(pop: ReasonerPopulation, max_sweeps: int = 1000) -> MdpSolution:
    """Minimal expected number of further draws until the query is decided.

    States are the reachable partial states, actions the undrawn
    propositions, transitions the exact conditionals; states deciding the
    query are terminal with value 0. Sweeps run until nothing changes,
    which happens after at most ``pop.size + 1`` sweeps because every action
    fills one more slot.
    """
    if pop.size > 6:
        raise ValueError("exact value iteration is limited to 6 propositions")
    states = reachable_states(pop)
    terminal = {s for s in states if pop.truth(s).decided}
    value = {s: Fraction(0) for s in states}
    policy: Dict[PartialState, int] = {}
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        changed = False
        new = dict(value)
        for s in states:
            if s in terminal:
                continue
            options = [i for i, v in enumerate(s) if v is None]
            best = min(options, key=lambda i: (_q(pop, s, i, value), i))
            new[s] = _q(pop, s, best, value)
            policy[s] = best
            changed |= new[s] != value[s]
        value = new
        if not changed:
            break
    residual = Fraction(0)
    for s in states:
        if s in terminal:
            residual = max(residual, abs(value[s]))
            continue
        opt = min(_q(pop, s, i, value) for i, v in enumerate(s) if v is None)
        residual = max(residual, abs(value[s] - opt))
    return MdpSolution(value, policy, pop.empty_state(), sweeps, residual)


def policy_expected_stopping_time(pop: ReasonerPopulation, phi: OrderingPolicy) -> Fraction:
    """Exact mean stopping time of ``phi``, summed over the population."""
    return sum((r.weight * early_stopped_map(pop, phi, r.beliefs).stop_time for r in pop.reasoners),
               Fraction(0))


def fixed_orders(pop: ReasonerPopulation) -> List[FixedOrder]:
    return [FixedOrder(p) for p in itertools.permutations(range(pop.size))]


def adaptive_policy_values(pop: ReasonerPopulation) -> Tuple[int, Dict[Fraction, int]]:
    """Expected stopping times of every deterministic adaptive policy.

    Policies are enumerated as decision trees over reachable states, with no
    minimisation anywhere; returns ``(number of policies, {value: count})``.
    """

    memo: Dict[PartialState, Dict[Fraction, int]] = {}

    def values(s: PartialState) -> Dict[Fraction, int]:
        if s in memo:
            return memo[s]
        if pop.truth(s).decided:
            memo[s] = {Fraction(0): 1}
            return memo[s]
        out: Dict[Fraction, int] = {}
        for i, v in enumerate(s):
            if v is not None:
                continue
            combos: Dict[Fraction, int] = {Fraction(1): 1}
            for p, t in _successors(pop, s, i):
                nxt: Dict[Fraction, int] = {}
                for acc, n in combos.items():
                    for val, m in values(t).items():
                        k = acc + p * val
                        nxt[k] = nxt.get(k, 0) + n * m
                combos = nxt
            for k, n in combos.items():
                out[k] = out.get(k, 0) + n
        memo[s] = out
        return out

    vals = values(pop.empty_state())
    return sum(vals.values()), vals


# -- verification suite -----------------------------------------------------

def standard_policies(pop: ReasonerPopulation, seed: int = 0) -> List[OrderingPolicy]:
    return [forward_order(pop), reverse_order(pop), RandomOrder(seed, pop.size), GreedyScore()]


def simulate_report(pop: ReasonerPopulation, seed: int = 0) -> dict:
    """Equivalence checks, MDP solution and policy comparison for one population."""
    rec: dict = {"population": pop.name, "propositions": pop.size, "reasoners": len(pop.reasoners),
                 "exact_ap": str(pop.exact_ap())}
    checks = []
    for phi in standard_policies(pop, seed):
        try:
            checks.append(verify_equivalence(pop, phi).as_dict())
        except EquivalenceViolation as exc:
            checks.append({"population": pop.name, "policy": phi.name, "ok": False, "error": str(exc)})
    rec["equivalence"] = checks
    sol = value_iteration(pop)
    optimal = Optimal(sol)
    times = {
        "optimal": policy_expected_stopping_time(pop, optimal),
        "greedy": policy_expected_stopping_time(pop, GreedyScore()),
        "random": policy_expected_stopping_time(pop, RandomOrder(seed, pop.size)),
        "forward": policy_expected_stopping_time(pop, forward_order(pop)),
        "reverse": policy_expected_stopping_time(pop, reverse_order(pop)),
    }
    fixed = [policy_expected_stopping_time(pop, f) for f in fixed_orders(pop)]
    n_adaptive, adaptive = adaptive_policy_values(pop)
    violations = sum(1 for t in fixed if t < sol.root_value)
    violations += sum(n for v, n in adaptive.items() if v < sol.root_value)
    rec.update({
        "root_value": str(sol.root_value),
        "bellman_residual": str(sol.residual),
        "sweeps": sol.sweeps,
        "expected_stopping_time": {k: str(v) for k, v in times.items()},
        "greedy_minus_optimal": float(times["greedy"] - times["optimal"]),
        "greedy_minus_random": float(times["greedy"] - times["random"]),
        "fixed_orders": len(fixed),
        "adaptive_policies": n_adaptive,
        "best_enumerated": str(min(min(fixed), min(adaptive))),
        "optimality_violations": violations,
        "ok": violations == 0 and sol.residual <= Fraction(1, 10**9) and all(c["ok"] for c in checks)
              and times["optimal"] == sol.root_value,
    })
    return rec
