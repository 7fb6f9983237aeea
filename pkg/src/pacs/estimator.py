"""Majority vote over sampled paths, and the exact value it estimates."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .population import InvalidPopulation, ReasonerPopulation
from .problem import ProblemInstance


class EmptySampleSet(ValueError):
    pass


class Verdict(enum.Enum):
    TRUE = "True"
    FALSE = "False"
    ABSTAIN = "Abstain"

    def matches(self, label: bool) -> bool:
        """Abstentions never count as correct."""
        return self is (Verdict.TRUE if label else Verdict.FALSE)

    def as_bool(self):
        return None if self is Verdict.ABSTAIN else self is Verdict.TRUE


@dataclass(frozen=True)
class Estimate:
    ap_hat: float
    k: int
    verdict: Verdict
    votes_true: int
    votes_false: int

    @classmethod
    def from_votes(cls, answers: Iterable[bool]) -> "Estimate":
        answers = [bool(a) for a in answers]
        if not answers:
            raise EmptySampleSet("no completed paths to vote with")
        t = sum(answers)
        k = len(answers)
        if 2 * t > k:
            verdict = Verdict.TRUE
        elif 2 * t < k:
            verdict = Verdict.FALSE
        else:
            verdict = Verdict.ABSTAIN
        return cls(t / k, k, verdict, t, k - t)

    def as_dict(self) -> dict:
        return {"ap_hat": self.ap_hat, "k": self.k, "verdict": self.verdict.value,
                "votes_true": self.votes_true, "votes_false": self.votes_false}


def estimate_ap(paths) -> Estimate:
    """One vote per path, by its answer; conflict-flagged paths included."""
    return Estimate.from_votes(p if isinstance(p, bool) else p.answer for p in paths)


def exact_ap(problem: ProblemInstance, pop: ReasonerPopulation) -> Fraction:
    """Weighted share of reasoners whose beliefs, with the premises, entail the query."""
    if pop.problem is not problem and (pop.problem.grounded != problem.grounded
                                       or pop.problem.query != problem.query):
        raise InvalidPopulation("population was built for a different problem")
    return pop.exact_ap()
