from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Iterable, Mapping, Optional, Sequence, Tuple

Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    ci_low: float
    ci_high: float
    never_correct_rate: float
    mean_path_length: Optional[float]
    mean_sampler_calls: float
    records: int
    correct: int
    abstained: int

    def as_dict(self) -> dict:
        return asdict(self)


def wilson_interval(successes: int, n: int, z: float = Z95) -> Tuple[float, float]:
    if n <= 0:
        raise ValueError("interval needs at least one trial")
    if not 0 <= successes <= n:
        raise ValueError("successes must lie in [0, n]")
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # rounding can push an endpoint past p at the extremes
    return min(lo, p), max(hi, p)


def _get(row, key):
    return row[key] if isinstance(row, Mapping) else getattr(row, key)


def compute_metrics(rows: Sequence) -> MetricSet:
    """Aggregate per-record rows; abstentions count as incorrect.

    Each row needs ``correct``, ``verdict``, ``answers`` (one per sampled
    path), ``label``, ``depths`` and ``sampler_calls``.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to aggregate")
    n = len(rows)
    correct = sum(1 for r in rows if _get(r, "correct"))
    abstained = sum(1 for r in rows if _get(r, "verdict") == "Abstain")
    never = sum(1 for r in rows if not any(a == _get(r, "label") for a in _get(r, "answers")))
    depths = [d for r in rows for d in _get(r, "depths")]
    lo, hi = wilson_interval(correct, n)
    return MetricSet(
        accuracy=correct / n,
        ci_low=lo,
        ci_high=hi,
        never_correct_rate=never / n,
        mean_path_length=sum(depths) / len(depths) if depths else None,
        mean_sampler_calls=sum(_get(r, "sampler_calls") for r in rows) / n,
        records=n,
        correct=correct,
        abstained=abstained,
    )
