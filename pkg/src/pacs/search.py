"""Scored beam search over reasoning chains with early stopping.

Each step asks the sampler for ``n`` candidate thoughts per beam state.
A candidate that makes the solver decide the query, or that declares a
final answer, closes a path; every closed path is kept. The remaining
consistent candidates are ranked by the model-count score and the ``m``
lowest survive to the next step.
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .logic import EmptyDomain, Formula, UnboundVariable, Vocabulary, atoms, constants, ground_all, render_formula
from .problem import ProblemInstance
from .sampling import Sampler, SamplerExhausted, SamplerRequest, Thought, chain_fingerprint
from .sat import (
    COUNT_CAP,
    InconsistentContext,
    ScoreBreakdown,
    TruthValue,
    is_satisfiable,
    score_state,
    truth_value,
)

log = logging.getLogger(__name__)


class NoPathsFound(RuntimeError):
    def __init__(self, message: str, stats: "SearchStats" = None):
        super().__init__(message)
        self.stats = stats


class StopReason(enum.Enum):
    SOLVER_ENTAILED = "SolverEntailed"
    SAMPLER_FINAL = "SamplerFinal"
    BOTH = "Both"


@dataclass
class SearchConfig:
    n: int = 5
    m: int = 3
    max_steps: int = 8
    wall_time_limit: float = 120.0
    max_new_atoms_per_thought: int = 4
    score_vocab_includes_query: bool = True
    random_seed: int = 0
    count_cap: int = COUNT_CAP

    def __post_init__(self):
        for name in ("n", "m", "max_steps", "max_new_atoms_per_thought"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.wall_time_limit <= 0:
            raise ValueError("wall_time_limit must be positive")


@dataclass(frozen=True)
class BeamState:
    chain: Tuple[Thought, ...]
    state_formulas: Tuple[Formula, ...]
    vocab: Vocabulary
    score: ScoreBreakdown
    score_trace: Tuple[ScoreBreakdown, ...]

    @property
    def depth(self) -> int:
        return len(self.chain)

    @property
    def fingerprint(self) -> str:
        return chain_fingerprint(self.chain)

    def rank_key(self):
        # equal scores: fewer models first, then shallower, then by rendering
        return (self.score.score, self.score.model_count, self.depth, self.fingerprint)


@dataclass(frozen=True)
class CompletedPath:
    chain: Tuple[Thought, ...]
    answer: bool
    stop_reason: StopReason
    conflict: bool
    score_trace: Tuple[ScoreBreakdown, ...]
    state_formulas: Tuple[Formula, ...] = field(default=(), repr=False)

    @property
    def depth(self) -> int:
        return len(self.chain)

    def to_dict(self) -> dict:
        return {
            "answer": self.answer,
            "stop_reason": self.stop_reason.value,
            "conflict": self.conflict,
            "depth": self.depth,
            "chain": [t.to_dict() for t in self.chain],
            "score_trace": [s.as_dict() for s in self.score_trace],
        }


@dataclass
class SearchStats:
    steps: int = 0
    sampler_calls: int = 0
    candidates: int = 0
    dropped: Dict[str, int] = field(default_factory=dict)
    halt_reason: str = ""

    def drop(self, reason: str) -> None:
        self.dropped[reason] = self.dropped.get(reason, 0) + 1

    def as_dict(self) -> dict:
        return asdict(self)


TraceSink = Callable[[dict], None]


class _Context:
    def __init__(self, problem: ProblemInstance, config: SearchConfig, stats: SearchStats,
                 trace: Optional[TraceSink]):
        self.problem = problem
        self.config = config
        self.stats = stats
        self.trace = trace
        self.base_domain = problem.domain

    def domain(self, formulas: Sequence[Formula]) -> Tuple[str, ...]:
        seen = dict.fromkeys(self.base_domain)
        for f in formulas:
            for c in constants(f):
                seen.setdefault(c)
        return tuple(seen)

    def full_vocab(self, chain_formulas) -> Vocabulary:
        return self.problem.vocabulary(chain_formulas, include_query=True)

    def score_vocab(self, chain_formulas) -> Vocabulary:
        return self.problem.vocabulary(chain_formulas, include_query=self.config.score_vocab_includes_query)

    def emit(self, record: dict) -> None:
        if self.trace is not None:
            self.trace(record)


def _chain_formulas(state_formulas: Sequence[Formula], problem: ProblemInstance) -> Tuple[Formula, ...]:
    return tuple(state_formulas[len(problem.grounded):])


def _initial_state(ctx: _Context) -> BeamState:
    problem = ctx.problem
    formulas = problem.grounded
    if not is_satisfiable(formulas, ctx.full_vocab(())):
        raise InconsistentContext(f"premises of {problem.id or 'problem'} are inconsistent")
    score = score_state(formulas, ctx.score_vocab(()), ctx.config.count_cap)
    return BeamState((), formulas, ctx.full_vocab(()), score, (score,))


def _extend(ctx: _Context, state: BeamState, thought: Thought):
    """Conjoin a thought's formula onto ``state``.

    Returns ``(formulas, vocab, truth, score)`` or a rejection reason string.
    """
    try:
        added = ground_all([thought.formula], ctx.domain(state.state_formulas))
    except (EmptyDomain, UnboundVariable):
        return "ungroundable"
    known = set(state.vocab.atoms)
    fresh = {a for f in added for a in atoms(f) if a not in known}
    if len(fresh) > ctx.config.max_new_atoms_per_thought:
        return "too_many_new_atoms"
    formulas = state.state_formulas + tuple(added)
    chain_formulas = _chain_formulas(formulas, ctx.problem)
    vocab = ctx.full_vocab(chain_formulas)
    score_vocab = ctx.score_vocab(chain_formulas)
    if len(score_vocab) > ctx.config.count_cap or len(vocab) > ctx.config.count_cap:
        return "vocabulary_cap"
    if not is_satisfiable(formulas, vocab):
        return "inconsistent"
    tv = truth_value(ctx.problem.query, formulas, vocab)
    return formulas, vocab, tv, score_state(formulas, score_vocab, ctx.config.count_cap)


def expand_state(state: BeamState, problem: ProblemInstance, sampler: Sampler, config: SearchConfig,
                 *, stream: Tuple[int, ...] = (), ctx: _Context = None):
    """Sample candidates for one beam state and sort them into outcomes.

    Returns ``(survivors, completed)``. Inconsistent or over-budget
    candidates are dropped and counted in the stats.
    """
    if ctx is None:
        ctx = _Context(problem, config, SearchStats(), None)
    request = SamplerRequest.for_problem(problem, state.chain, config.n, stream)
    ctx.stats.sampler_calls += 1
    record = {"stream": list(stream), "state": state.fingerprint, "depth": state.depth,
              "score": state.score.as_dict(), "candidates": []}
    try:
        candidates = sampler.sample_candidates(request)
    except SamplerExhausted as exc:
        record["exhausted"] = str(exc)
        ctx.emit(record)
        return [], []
    survivors: List[BeamState] = []
    completed: List[CompletedPath] = []
    for cand in candidates:
        ctx.stats.candidates += 1
        entry = {"thought": cand.to_dict()}
        record["candidates"].append(entry)
        chain = state.chain + (cand,)
        if cand.formula is None:
            formulas, trace = state.state_formulas, state.score_trace
            tv = truth_value(problem.query, formulas, state.vocab)
        else:
            out = _extend(ctx, state, cand)
            if isinstance(out, str):
                ctx.stats.drop(out)
                entry["decision"] = out
                continue
            formulas, vocab, tv, score = out
            trace = state.score_trace + (score,)
            entry["score"] = score.as_dict()
            if not cand.is_final and not tv.decided:
                survivors.append(BeamState(chain, formulas, vocab, score, trace))
                entry["decision"] = "survivor"
                continue
        if cand.is_final:
            if tv.decided:
                solver_answer = tv is TruthValue.TRUE
                path = CompletedPath(chain, solver_answer, StopReason.BOTH,
                                     solver_answer != cand.declared_answer, trace, formulas)
            else:
                path = CompletedPath(chain, cand.declared_answer, StopReason.SAMPLER_FINAL, False, trace,
                                     formulas)
        else:
            path = CompletedPath(chain, tv is TruthValue.TRUE, StopReason.SOLVER_ENTAILED, False, trace,
                                 formulas)
        completed.append(path)
        entry.update(decision="completed", answer=path.answer, stop_reason=path.stop_reason.value,
                     conflict=path.conflict)
    ctx.emit(record)
    return survivors, completed


def run_search(problem: ProblemInstance, sampler: Sampler, config: SearchConfig = None, *,
               trace: Optional[TraceSink] = None, stats: Optional[SearchStats] = None) -> List[CompletedPath]:
    """Collect early-stopped reasoning paths for ``problem``.

    Raises :class:`NoPathsFound` when the search halts without completing
    a single path; the stats travel on the exception.
    """
    config = config or SearchConfig()
    stats = stats if stats is not None else SearchStats()
    ctx = _Context(problem, config, stats, trace)
    started = time.monotonic()
    root = _initial_state(ctx)
    tv = truth_value(problem.query, root.state_formulas, root.vocab)
    if tv.decided:
        stats.halt_reason = "presolved"
        ctx.emit({"event": "presolved", "answer": tv is TruthValue.TRUE})
        return [CompletedPath((), tv is TruthValue.TRUE, StopReason.SOLVER_ENTAILED, False,
                              root.score_trace, root.state_formulas)]
    beam = [root]
    completed: List[CompletedPath] = []
    for step in range(config.max_steps):
        if time.monotonic() - started > config.wall_time_limit:
            stats.halt_reason = "time_limit"
            break
        stats.steps = step + 1
        survivors: List[BeamState] = []
        for b, state in enumerate(beam):
            if time.monotonic() - started > config.wall_time_limit:
                stats.halt_reason = "time_limit"
                break
            s, c = expand_state(state, problem, sampler, config,
                                stream=(config.random_seed, step, b), ctx=ctx)
            survivors.extend(s)
            completed.extend(c)
        if stats.halt_reason:
            break
        survivors.sort(key=BeamState.rank_key)
        beam = survivors[: config.m]
        ctx.emit({"event": "beam", "step": step, "kept": [s.fingerprint for s in beam],
                  "pruned": [s.fingerprint for s in survivors[config.m:]],
                  "completed_total": len(completed)})
        if not beam:
            stats.halt_reason = "beam_exhausted"
            break
    else:
        stats.halt_reason = "max_steps"
    ctx.emit({"event": "halt", "reason": stats.halt_reason, "completed": len(completed)})
    if not completed:
        raise NoPathsFound(f"search on {problem.id or 'problem'} ended ({stats.halt_reason}) with no paths",
                           stats)
    return completed
