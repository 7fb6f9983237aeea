"""Thought samplers.

A sampler proposes candidate next thoughts for a partial reasoning chain.
The search only ever talks to this interface, so the LLM client, the
scripted test double and the population sampler are interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .logic import TRUE, Formula, Not, parse_formula, render_formula
from .population import (
    Epistemic,
    ImpossibleCondition,
    OrderingPolicy,
    ReasonerPopulation,
    belief_formula,
    draw,
    forward_order,
    make_rng,
)
from .problem import ProblemInstance
from .sat import TruthValue


class SamplerExhausted(LookupError):
    """The sampler has nothing to offer for this chain."""


@dataclass(frozen=True)
class Thought:
    text: str
    formula: Optional[Formula] = None
    is_final: bool = False
    declared_answer: Optional[bool] = None

    def __post_init__(self):
        if self.is_final != (self.declared_answer is not None):
            raise ValueError("a thought is final exactly when it declares an answer")
        if not self.is_final and self.formula is None:
            raise ValueError("non-final thoughts need a formula")

    @classmethod
    def step(cls, text: str, formula: Union[Formula, str]) -> "Thought":
        if isinstance(formula, str):
            formula = parse_formula(formula)
        return cls(text, formula)

    @classmethod
    def final(cls, text: str, answer: bool, formula: Union[Formula, str, None] = None) -> "Thought":
        if isinstance(formula, str):
            formula = parse_formula(formula)
        return cls(text, formula, True, bool(answer))

    @classmethod
    def from_dict(cls, d: Mapping) -> "Thought":
        logic = d.get("logic")
        if "answer" in d and d["answer"] is not None:
            return cls.final(d.get("text", ""), _as_bool(d["answer"]), logic)
        if logic is None:
            raise ValueError(f"thought {d!r} has neither logic nor answer")
        return cls.step(d.get("text", ""), logic)

    def to_dict(self) -> dict:
        out = {"text": self.text}
        if self.formula is not None:
            out["logic"] = render_formula(self.formula)
        if self.is_final:
            out["answer"] = self.declared_answer
        return out

    @property
    def key(self) -> Tuple[str, bool, Optional[bool]]:
        return (render_formula(self.formula) if self.formula is not None else "", self.is_final,
                self.declared_answer)


def _as_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.strip().lower() in ("true", "false"):
        return v.strip().lower() == "true"
    raise ValueError(f"not a boolean: {v!r}")


FINGERPRINT_SEP = "; "


def chain_fingerprint(chain: Iterable[Thought]) -> str:
    return FINGERPRINT_SEP.join(render_formula(t.formula) for t in chain)


def canonical_fingerprint(key: str) -> str:
    """Normalise a hand-written script key to its canonical form."""
    if not key.strip():
        return ""
    return FINGERPRINT_SEP.join(render_formula(parse_formula(part)) for part in key.split(";"))


@dataclass(frozen=True)
class SamplerRequest:
    premises_text: str
    premises_logic: Tuple[Formula, ...]
    query_text: str
    query_formula: Formula
    chain: Tuple[Thought, ...] = ()
    n: int = 1
    stream: Tuple[int, ...] = ()
    problem: Optional[ProblemInstance] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "chain", tuple(self.chain))
        object.__setattr__(self, "premises_logic", tuple(self.premises_logic))
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if any(t.is_final for t in self.chain):
            raise ValueError("the chain may not contain a final thought")

    @classmethod
    def for_problem(cls, problem: ProblemInstance, chain=(), n: int = 1, stream=()) -> "SamplerRequest":
        return cls(problem.premises_block, problem.premises, problem.query_text, problem.query,
                   tuple(chain), n, tuple(stream), problem)


def dedupe(thoughts: Iterable[Thought]) -> List[Thought]:
    seen = set()
    out = []
    for t in thoughts:
        if t.key not in seen:
            seen.add(t.key)
            out.append(t)
    return out


class Sampler:
    """Base class; subclasses implement :meth:`sample_candidates`."""

    def sample_candidates(self, request: SamplerRequest) -> List[Thought]:
        raise NotImplementedError


class ScriptedSampler(Sampler):
    """Replays fixed candidate lists keyed by chain fingerprint."""

    def __init__(self, script: Union[Mapping[str, Sequence], Sequence[Tuple[str, Sequence]]]):
        items = script.items() if isinstance(script, Mapping) else script
        table: Dict[str, Tuple[Thought, ...]] = {}
        for key, candidates in items:
            canon = canonical_fingerprint(key)
            if canon in table:
                raise ValueError(f"duplicate script key {key!r}")
            table[canon] = tuple(c if isinstance(c, Thought) else Thought.from_dict(c) for c in candidates)
        self.script = table

    def sample_candidates(self, request: SamplerRequest) -> List[Thought]:
        key = chain_fingerprint(request.chain)
        try:
            candidates = self.script[key]
        except KeyError:
            raise SamplerExhausted(f"no scripted continuation for chain [{key}]") from None
        if not candidates:
            raise SamplerExhausted(f"empty script entry for chain [{key}]")
        return dedupe(candidates)[: request.n]


def make_scripted_sampler(script) -> ScriptedSampler:
    return ScriptedSampler(script)


class PopulationSampler(Sampler):
    """Draws one epistemic statement per call from an explicit population.

    The chain is read back as a partial belief state; the next proposition
    comes from ``order`` and its value from the exact conditional. Once the
    chain decides the query the sampler answers with a final thought, like a
    reasoner who has made up their mind.
    """

    PREFIX = {Epistemic.KNOW: "know", Epistemic.KNOW_NOT: "know_not", Epistemic.UNKNOWN: "unknown"}

    def __init__(self, pop: ReasonerPopulation, order: Optional[OrderingPolicy] = None, seed: int = 0):
        self.pop = pop
        self.order = order or forward_order(pop)
        self.seed = seed
        self._index = {render_formula(p): i for i, p in enumerate(pop.propositions)}

    def thought_for(self, index: int, value: Epistemic) -> Thought:
        prop = self.pop.propositions[index]
        f = belief_formula(prop, value)
        return Thought(f"{self.PREFIX[value]}: {render_formula(prop)}", f if f is not None else TRUE)

    def decode(self, chain: Sequence[Thought]):
        partial = list(self.pop.empty_state())
        for t in chain:
            tag, _, rest = t.text.partition(":")
            try:
                value = Epistemic(tag.strip())
                i = self._index[render_formula(parse_formula(rest.strip()))]
            except (ValueError, KeyError):
                raise ImpossibleCondition(f"thought {t.text!r} is not a statement about this population") from None
            if partial[i] is not None and partial[i] is not value:
                raise ImpossibleCondition(f"chain states two values for {rest.strip()}")
            partial[i] = value
        partial = tuple(partial)
        if not self.pop.support(partial):
            raise ImpossibleCondition(f"no reasoner holds {self.pop.describe(partial)}")
        return partial

    def sample_candidates(self, request: SamplerRequest) -> List[Thought]:
        partial = self.decode(request.chain)
        verdict = self.pop.truth(partial)
        if verdict.decided:
            answer = verdict is TruthValue.TRUE
            return [Thought.final(f"so the answer is {answer}", answer)]
        i = self.order.choose(partial, self.pop)
        rng = make_rng((self.seed, *request.stream, len(request.chain)))
        return [self.thought_for(i, draw(self.pop.conditional(partial, i), rng))]


def make_population_sampler(pop: ReasonerPopulation, order: Optional[OrderingPolicy] = None,
                            seed: int = 0) -> PopulationSampler:
    return PopulationSampler(pop, order, seed)
