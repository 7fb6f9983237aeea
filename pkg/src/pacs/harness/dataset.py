"""Line-delimited problem records.

One JSON object per line::

    {"id": "...", "premises": [{"text": "...", "logic": "..."}, ...],
     "query_text": "...", "query_logic": "...", "label": true,
     "constants": ["..."]}

Records may also carry a ``script`` (chain fingerprint -> candidate
thoughts) for the scripted sampler, or a ``population`` block for the
population sampler.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import List, Optional, Tuple

from ..logic import FormulaSyntaxError, parse_formula
from ..population import InvalidPopulation, ReasonerPopulation
from ..problem import ProblemInstance
from ..sampling import ScriptedSampler

log = logging.getLogger(__name__)

BUNDLED = ("synthetic", "populations", "bus_stop")


class DatasetError(ValueError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    premises: Tuple[Tuple[str, str], ...]
    query_text: str
    query_logic: str
    label: bool
    constants: Tuple[str, ...] = ()
    script: Optional[dict] = field(default=None, compare=False, repr=False)
    population: Optional[dict] = field(default=None, compare=False, repr=False)

    def problem(self) -> ProblemInstance:
        return ProblemInstance(
            tuple(parse_formula(logic) for _, logic in self.premises),
            parse_formula(self.query_logic),
            constants=self.constants,
            premises_text=tuple(text for text, _ in self.premises),
            query_text=self.query_text,
            id=self.id,
            label=self.label,
        )

    def reasoner_population(self, problem: ProblemInstance = None) -> ReasonerPopulation:
        if self.population is None:
            raise LookupError(f"record {self.id} has no population block")
        return ReasonerPopulation.from_dict(problem or self.problem(), self.population, self.id)

    def scripted_sampler(self) -> ScriptedSampler:
        if self.script is None:
            raise LookupError(f"record {self.id} has no script")
        return ScriptedSampler(self.script)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "premises": [{"text": t, "logic": l} for t, l in self.premises],
            "query_text": self.query_text,
            "query_logic": self.query_logic,
            "label": self.label,
        }
        if self.constants:
            out["constants"] = list(self.constants)
        if self.script is not None:
            out["script"] = self.script
        if self.population is not None:
            out["population"] = self.population
        return out


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ValueError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _label(v) -> bool:
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.strip() in ("True", "False", "true", "false"):
        return v.strip().lower() == "true"
    raise ValueError(f"label must be True or False, got {v!r}")


def _check_logic(where: str, text) -> str:
    if not isinstance(text, str):
        raise ValueError(f"{where} must be a string")
    try:
        parse_formula(text)
    except FormulaSyntaxError as exc:
        raise ValueError(f"{where} {text!r}: {exc}") from None
    return text


def parse_record(obj) -> DatasetRecord:
    if not isinstance(obj, dict):
        raise ValueError("record must be an object")
    missing = [k for k in ("id", "premises", "query_logic", "label") if k not in obj]
    if missing:
        raise ValueError(f"missing field(s) {', '.join(missing)}")
    premises = []
    for i, p in enumerate(obj["premises"]):
        if isinstance(p, dict):
            text, logic = p.get("text", ""), p.get("logic")
        elif isinstance(p, (list, tuple)) and len(p) == 2:
            text, logic = p
        else:
            raise ValueError(f"premise {i} must be {{text, logic}} or a [text, logic] pair")
        premises.append((str(text), _check_logic(f"premise {i} logic", logic)))
    rec = DatasetRecord(
        id=str(obj["id"]),
        premises=tuple(premises),
        query_text=str(obj.get("query_text", "")),
        query_logic=_check_logic("query_logic", obj["query_logic"]),
        label=_label(obj["label"]),
        constants=tuple(str(c) for c in obj.get("constants") or ()),
        script=obj.get("script"),
        population=obj.get("population"),
    )
    problem = rec.problem()
    if rec.script is not None:
        rec.scripted_sampler()
    if rec.population is not None:
        try:
            rec.reasoner_population(problem)
        except (InvalidPopulation, KeyError, TypeError) as exc:
            raise ValueError(f"population: {exc}") from None
    return rec


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("pacs.data").joinpath(f"{name}.jsonl")))


def resolve_dataset(source: str) -> Path:
    """A filesystem path, or ``bundled:<name>`` for the shipped fixtures."""
    if source.startswith("bundled:"):
        name = source.split(":", 1)[1]
        if name not in BUNDLED:
            raise DatasetError(f"no bundled dataset {name!r}; choose from {', '.join(BUNDLED)}")
        return bundled_path(name)
    return Path(source)


def load_dataset_with_diagnostics(path, strict: bool = False) -> Tuple[List[DatasetRecord], List[DatasetError]]:
    path = resolve_dataset(str(path))
    records: List[DatasetRecord] = []
    problems: List[DatasetError] = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = parse_record(json.loads(line, object_pairs_hook=_no_duplicates))
                if rec.id in seen:
                    raise ValueError(f"duplicate record id {rec.id!r}")
            except (ValueError, TypeError) as exc:
                err = DatasetError(str(exc), lineno)
                if strict:
                    raise err from None
                log.warning("%s: skipping %s", path, err)
                problems.append(err)
                continue
            seen.add(rec.id)
            records.append(rec)
    if not records and not problems:
        log.warning("%s contains no records", path)
    return records, problems


def load_dataset(path, strict: bool = False) -> List[DatasetRecord]:
    """Parse and validate every record; bad lines are skipped unless ``strict``."""
    return load_dataset_with_diagnostics(path, strict)[0]
