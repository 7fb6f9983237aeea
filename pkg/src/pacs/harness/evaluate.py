"""Batch evaluation of PACS and the chain-of-thought baselines."""

from __future__ import annotations

import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence

from ..estimator import EmptySampleSet, Estimate, Verdict, estimate_ap
from ..population import forward_order
from ..problem import ProblemInstance
from ..sampling import PopulationSampler, Sampler, SamplerExhausted, SamplerRequest
from ..search import NoPathsFound, SearchConfig, SearchStats, run_search
from .dataset import DatasetRecord
from .metrics import MetricSet, compute_metrics

log = logging.getLogger(__name__)

METHODS = ("pacs", "cot", "sc")
SamplerFactory = Callable[[DatasetRecord, ProblemInstance], Sampler]


class CountingSampler(Sampler):
    def __init__(self, inner: Sampler):
        self.inner = inner
        self.calls = 0

    def sample_candidates(self, request: SamplerRequest):
        self.calls += 1
        return self.inner.sample_candidates(request)


class TraceWriter:
    """Thread-safe line-delimited trace sink; every record is tagged."""

    def __init__(self, fh):
        self.fh = fh
        self._lock = threading.Lock()

    def sink(self, **tags) -> Callable[[dict], None]:
        def emit(record: dict) -> None:
            line = json.dumps({**tags, **record}, default=str)
            with self._lock:
                self.fh.write(line + "\n")
        return emit


@dataclass
class EvalConfig:
    method: str = "pacs"
    search: SearchConfig = field(default_factory=SearchConfig)
    k: int = 20
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {', '.join(METHODS)}")
        if self.k < 1 or self.workers < 1:
            raise ValueError("k and workers must be positive")
        if self.method == "cot":
            self.k = 1
        self.search.random_seed = self.seed

    def as_dict(self) -> dict:
        return {"method": self.method, "k": self.k, "workers": self.workers, "seed": self.seed,
                "search": asdict(self.search)}


@dataclass
class RecordResult:
    id: str
    label: bool
    verdict: str
    ap_hat: Optional[float]
    k: int
    answers: List[bool]
    depths: List[int]
    stop_reasons: List[str]
    conflicts: int
    sampler_calls: int
    correct: bool
    halt_reason: str = ""
    error: Optional[str] = None
    wall_time: float = 0.0

    def as_dict(self, wall_time: bool = True) -> dict:
        d = asdict(self)
        if not wall_time:
            d.pop("wall_time")
        return d


@dataclass
class RunReport:
    config: dict
    rows: List[RecordResult]
    metrics: MetricSet
    wall_time: float = 0.0

    def lines(self, wall_time: bool = True) -> List[dict]:
        out = [{"type": "config", **self.config}]
        out += [{"type": "record", **r.as_dict(wall_time)} for r in self.rows]
        agg = {"type": "aggregate", **self.metrics.as_dict()}
        if wall_time:
            agg["wall_time"] = self.wall_time
        out.append(agg)
        return out

    def dumps(self, wall_time: bool = True) -> str:
        return "".join(json.dumps(line, sort_keys=True) + "\n" for line in self.lines(wall_time))

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())


def sample_chain(problem: ProblemInstance, sampler: Sampler, max_steps: int, stream=()):
    """One unguided chain: take the first proposal until a final answer.

    Returns ``(answer, chain)``; ``answer`` is None if the chain never
    declared one within ``max_steps`` thoughts.
    """
    chain = ()
    for t in range(max_steps + 1):
        request = SamplerRequest.for_problem(problem, chain, 1, (*stream, t))
        try:
            candidates = sampler.sample_candidates(request)
        except SamplerExhausted:
            return None, chain
        thought = candidates[0]
        if thought.is_final:
            return thought.declared_answer, chain + (thought,)
        if t == max_steps:
            break
        chain = chain + (thought,)
    return None, chain


def _row(rec: DatasetRecord, estimate: Optional[Estimate], answers, depths, reasons, conflicts,
         calls: int, halt: str = "", error: Optional[str] = None) -> RecordResult:
    verdict = estimate.verdict if estimate is not None else Verdict.ABSTAIN
    return RecordResult(
        id=rec.id, label=rec.label, verdict=verdict.value,
        ap_hat=estimate.ap_hat if estimate is not None else None,
        k=estimate.k if estimate is not None else 0,
        answers=list(answers), depths=list(depths), stop_reasons=list(reasons), conflicts=conflicts,
        sampler_calls=calls, correct=verdict.matches(rec.label), halt_reason=halt, error=error,
    )


def evaluate_record(rec: DatasetRecord, factory: SamplerFactory, config: EvalConfig,
                    trace: Optional[Callable[[dict], None]] = None) -> RecordResult:
    started = time.monotonic()
    counter = None
    try:
        problem = rec.problem()
        counter = CountingSampler(factory(rec, problem))
        if config.method == "pacs":
            stats = SearchStats()
            try:
                paths = run_search(problem, counter, config.search, trace=trace, stats=stats)
            except NoPathsFound:
                row = _row(rec, None, [], [], [], 0, counter.calls, stats.halt_reason)
            else:
                row = _row(rec, estimate_ap(paths), [p.answer for p in paths], [p.depth for p in paths],
                           [p.stop_reason.value for p in paths], sum(p.conflict for p in paths),
                           counter.calls, stats.halt_reason)
        else:
            answers, depths = [], []
            for i in range(config.k):
                answer, chain = sample_chain(problem, counter, config.search.max_steps, (config.seed, i))
                if trace is not None:
                    trace({"event": "chain", "sample": i, "answer": answer,
                           "chain": [t.to_dict() for t in chain]})
                if answer is not None:
                    answers.append(answer)
                    depths.append(len(chain))
            try:
                estimate = estimate_ap(answers)
            except EmptySampleSet:
                estimate = None
            row = _row(rec, estimate, answers, depths, ["SamplerFinal"] * len(answers), 0, counter.calls)
    except Exception as exc:  # one bad record must not sink the batch
        log.warning("record %s failed: %s", rec.id, exc)
        row = _row(rec, None, [], [], [], 0, counter.calls if counter else 0,
                   error=f"{type(exc).__name__}: {exc}")
    row.wall_time = time.monotonic() - started
    return row


def run_eval(dataset: Sequence[DatasetRecord], method: str, factory: SamplerFactory,
             config: Optional[EvalConfig] = None, *, trace: Optional[TraceWriter] = None,
             extra_config: Optional[dict] = None) -> RunReport:
    """Evaluate every record; rows keep the dataset order whatever the worker count."""
    if config is None:
        config = EvalConfig(method=method)
    elif config.method != method:
        config = EvalConfig(method, config.search, config.k, config.workers, config.seed)
    if not dataset:
        raise ValueError("dataset is empty")
    started = time.monotonic()

    def one(rec):
        sink = trace.sink(record=rec.id) if trace is not None else None
        return evaluate_record(rec, factory, config, sink)

    if config.workers == 1:
        rows = [one(r) for r in dataset]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(one, dataset))
    echo = {**config.as_dict(), **(extra_config or {})}
    return RunReport(echo, rows, compute_metrics(rows), time.monotonic() - started)


def scripted_factory(rec: DatasetRecord, problem: ProblemInstance) -> Sampler:
    return rec.scripted_sampler()


def population_factory(seed: int = 0, order: str = "forward") -> SamplerFactory:
    from ..population import GreedyScore, reverse_order

    def make(rec: DatasetRecord, problem: ProblemInstance) -> Sampler:
        pop = rec.reasoner_population(problem)
        policy = {"forward": forward_order, "reverse": reverse_order,
                  "greedy": lambda p: GreedyScore()}[order](pop)
        return PopulationSampler(pop, policy, seed)
    return make


def shared_factory(sampler: Sampler) -> SamplerFactory:
    return lambda rec, problem: sampler
