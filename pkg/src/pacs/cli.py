"""Command-line entry point: ``pacs {solve,eval,simulate,score}``."""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import yaml

from .estimator import estimate_ap
from .harness import (
    EvalConfig,
    TraceWriter,
    load_dataset,
    population_factory,
    run_eval,
    scripted_factory,
    shared_factory,
)
from .logic import Vocabulary, constants, ground_all, parse_formula
from .population import simulate_report
from .search import NoPathsFound, SearchConfig, SearchStats, run_search
from .sampling import ScriptedSampler
from .sat import score_state, truth_value

log = logging.getLogger("pacs")

SAMPLERS = ("scripted", "population", "llm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_search_flags(p: argparse.ArgumentParser, sampler: str = "scripted") -> None:
    d = SearchConfig()
    p.add_argument("--sampler", choices=SAMPLERS, default=sampler)
    p.add_argument("--n", type=int, default=d.n, help="candidates per beam state")
    p.add_argument("--m", type=int, default=d.m, help="beam width")
    p.add_argument("--max-steps", type=int, default=d.max_steps)
    p.add_argument("--time-limit", type=float, default=d.wall_time_limit, help="seconds per search")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", choices=("forward", "reverse", "greedy"), default="forward",
                   help="proposition order for the population sampler")
    p.add_argument("--template", help="few-shot template JSON for the llm sampler")
    p.add_argument("--temperature", type=float, default=0.7)
    p.add_argument("--trace", help="write a line-delimited trace here")
    p.add_argument("--config", help="YAML or JSON file whose keys override these flags")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pacs", description="Abductive reasoning by scored search over thought chains.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="run one problem end to end")
    p.add_argument("--dataset", default="bundled:bus_stop")
    p.add_argument("--id", help="record id within the dataset (default: first)")
    _add_search_flags(p, sampler="llm")

    p = sub.add_parser("eval", help="evaluate a dataset and write a run report")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", choices=("pacs", "cot", "sc"), default="pacs")
    p.add_argument("--k", type=int, default=20, help="samples for self-consistency")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report", help="report path (default: stdout)")
    p.add_argument("--strict", action="store_true", help="abort on the first bad dataset line")
    _add_search_flags(p)

    p = sub.add_parser("simulate", help="verify population fixtures exactly")
    p.add_argument("--dataset", default="bundled:populations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="report path (default: stdout)")
    p.add_argument("--config")

    p = sub.add_parser("score", help="print (models, vars, backbone, score) for a state")
    p.add_argument("--formula", action="append", default=[], help="conjunct; repeatable")
    p.add_argument("--file", help="one formula per line; '#' starts a comment")
    p.add_argument("--constants", nargs="*", default=None, help="grounding domain for ForAll")
    p.add_argument("--json", action="store_true")
    p.add_argument("--config")
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    path = getattr(args, "config", None)
    if not path:
        return
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config must be a mapping")
    for key, value in data.items():
        attr = key.replace("-", "_")
        if attr in ("command", "config") or not hasattr(args, attr):
            raise UsageError(f"{path}: unknown setting {key!r} for {args.command}")
        setattr(args, attr, value)


def _search_config(args) -> SearchConfig:
    return SearchConfig(n=args.n, m=args.m, max_steps=args.max_steps, wall_time_limit=args.time_limit,
                        random_seed=args.seed)


def _factory(args, trace_writer: Optional[TraceWriter]):
    if args.sampler == "scripted":
        return scripted_factory
    if args.sampler == "population":
        return population_factory(args.seed, args.order)
    from .llm import CompletionConfig, LLMSampler, PromptTemplate
    config = CompletionConfig.from_env(temperature=args.temperature)
    template = PromptTemplate.from_file(args.template) if args.template else None
    sink = trace_writer.sink(source="llm") if trace_writer else None
    return shared_factory(LLMSampler(config, template, trace=sink))


@contextlib.contextmanager
def _trace_writer(path):
    if not path:
        yield None
        return
    with open(path, "w", encoding="utf-8") as fh:
        yield TraceWriter(fh)


@contextlib.contextmanager
def _output(path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh
    else:
        yield sys.stdout


def cmd_solve(args) -> int:
    records = load_dataset(args.dataset, strict=True)
    if args.id is not None:
        records = [r for r in records if r.id == args.id]
    if not records:
        raise LookupError(f"no record {args.id!r} in {args.dataset}" if args.id else f"{args.dataset} is empty")
    rec = records[0]
    problem = rec.problem()
    with _trace_writer(args.trace) as tw:
        # a query the premises already settle never reaches the sampler
        presolved = truth_value(problem.query, problem.grounded, problem.vocabulary()).decided
        sampler = ScriptedSampler({}) if presolved else _factory(args, tw)(rec, problem)
        stats = SearchStats()
        sink = tw.sink(record=rec.id) if tw else None
        try:
            paths = run_search(problem, sampler, _search_config(args), trace=sink, stats=stats)
        except NoPathsFound as exc:
            print(json.dumps({"id": rec.id, "verdict": "Abstain", "halt_reason": stats.halt_reason,
                              "error": str(exc)}))
            return 0
    est = estimate_ap(paths)
    print(json.dumps({"id": rec.id, "label": rec.label, **est.as_dict(), "halt_reason": stats.halt_reason,
                      "paths": [p.to_dict() for p in paths]}, indent=1))
    return 0


def cmd_eval(args) -> int:
    dataset = load_dataset(args.dataset, strict=args.strict)
    if not dataset:
        raise ValueError(f"{args.dataset}: no usable records")
    config = EvalConfig(method=args.method, search=_search_config(args), k=args.k, workers=args.workers,
                        seed=args.seed)
    echo = {"dataset": args.dataset, "sampler": args.sampler}
    with _trace_writer(args.trace) as tw:
        report = run_eval(dataset, args.method, _factory(args, tw), config, trace=tw, extra_config=echo)
    with _output(args.report) as fh:
        fh.write(report.dumps())
    m = report.metrics
    print(f"{args.method}: accuracy {m.accuracy:.3f} [{m.ci_low:.3f}, {m.ci_high:.3f}] on {m.records} records",
          file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    records = [r for r in load_dataset(args.dataset, strict=True) if r.population is not None]
    if not records:
        raise ValueError(f"{args.dataset} has no population records")
    reports = [simulate_report(r.reasoner_population(), seed=args.seed) for r in records]
    greedy_opt = [r["greedy_minus_optimal"] for r in reports]
    greedy_rand = [r["greedy_minus_random"] for r in reports]
    summary = {
        "type": "summary",
        "populations": len(reports),
        "all_ok": all(r["ok"] for r in reports),
        "mean_greedy_minus_optimal": sum(greedy_opt) / len(reports),
        "mean_greedy_minus_random": sum(greedy_rand) / len(reports),
    }
    with _output(args.report) as fh:
        for r in reports:
            fh.write(json.dumps({"type": "population", **r}, sort_keys=True) + "\n")
        fh.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0 if summary["all_ok"] else 2


def _read_formula_file(path) -> List[str]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def cmd_score(args) -> int:
    texts = list(args.formula) + (_read_formula_file(args.file) if args.file else [])
    if not texts:
        raise UsageError("score needs --formula or --file")
    formulas = [parse_formula(t) for t in texts]
    domain = args.constants
    if domain is None:
        domain = [c for f in formulas for c in constants(f)]
    state = ground_all(formulas, list(dict.fromkeys(domain)))
    b = score_state(state, Vocabulary.from_formulas(state))
    print(json.dumps(b.as_dict()) if args.json else str(b.as_tuple()))
    return 0


COMMANDS = {"solve": cmd_solve, "eval": cmd_eval, "simulate": cmd_simulate, "score": cmd_score}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("pacs: error: a subcommand is required")
        _apply_config(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if not exc.code else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"pacs {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
