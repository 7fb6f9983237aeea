"""Sampling thoughts from an OpenAI-compatible chat-completions endpoint."""

from __future__ import annotations

import json
import logging
import os
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Callable, List, Optional, Sequence, Tuple

import httpx

from .logic import render_formula, try_parse
from .sampling import Sampler, SamplerExhausted, SamplerRequest, Thought, dedupe

log = logging.getLogger(__name__)

ENV_ENDPOINT = "PACS_LLM_ENDPOINT"
ENV_MODEL = "PACS_LLM_MODEL"
ENV_API_KEY = "PACS_LLM_API_KEY"

SYSTEM_MESSAGE = (
    "Continue the numbered reasoning by exactly one step. Write one sentence, then its "
    "translation into the logic notation on the next line. If the answer is settled, write "
    "one sentence and then `return True` or `return False`."
)


class Unparseable(ValueError):
    pass


class TransportError(RuntimeError):
    def __init__(self, message: str, status: Optional[int] = None):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class WorkedExample:
    premises: Tuple[Tuple[str, str], ...]
    query_text: str
    query_logic: str
    steps: Tuple[Tuple[str, str], ...]
    final_text: str
    answer: bool

    @classmethod
    def from_dict(cls, d: dict) -> "WorkedExample":
        return cls(
            tuple((p["text"], p["logic"]) for p in d["premises"]),
            d["query_text"],
            d["query_logic"],
            tuple((s["text"], s["logic"]) for s in d.get("steps", [])),
            d["final"]["text"],
            bool(d["final"]["answer"]),
        )


@dataclass(frozen=True)
class PromptTemplate:
    few_shot_examples: Tuple[WorkedExample, ...]
    instruction_preamble: str = "# Instruction: determine if the student's answer is True or False."
    step_marker: str = "#"

    def __post_init__(self):
        if not self.few_shot_examples:
            raise ValueError("a prompt template needs at least one worked example")

    @classmethod
    def from_file(cls, path) -> "PromptTemplate":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def from_dict(cls, d: dict) -> "PromptTemplate":
        kw = {k: d[k] for k in ("instruction_preamble", "step_marker") if k in d}
        return cls(tuple(WorkedExample.from_dict(e) for e in d["examples"]), **kw)


def default_template() -> PromptTemplate:
    text = resources.files("pacs.data").joinpath("fewshot.json").read_text(encoding="utf-8")
    return PromptTemplate.from_dict(json.loads(text))


def _problem_block(premises: Sequence[Tuple[str, str]], query_text: str, query_logic: str,
                   template: PromptTemplate) -> List[str]:
    lines = ["Here is some context:"]
    for text, logic in premises:
        if text:
            lines.append(f"# {text}")
        lines.append(logic)
    for q in query_text.splitlines():
        if q.strip():
            lines.append(f"# {q.strip()}")
    lines.append(template.instruction_preamble)
    lines.append(f"return {query_logic}")
    lines.append("Let's think step by step:")
    return lines


def _step(marker: str, i: int, text: str, logic: str) -> List[str]:
    return [f"{marker}{i}.", text, logic]


def render_example(ex: WorkedExample, template: PromptTemplate) -> str:
    lines = _problem_block(ex.premises, ex.query_text, ex.query_logic, template)
    for i, (text, logic) in enumerate(ex.steps, 1):
        lines += _step(template.step_marker, i, text, logic)
    lines += _step(template.step_marker, len(ex.steps) + 1, ex.final_text, f"return {ex.answer}")
    return "\n".join(lines)


def _request_premises(request: SamplerRequest) -> List[Tuple[str, str]]:
    if request.problem is not None:
        texts = request.problem.premises_text
    else:
        texts = ()
    out = []
    for i, f in enumerate(request.premises_logic):
        out.append((texts[i] if i < len(texts) else "", render_formula(f)))
    return out


def build_prompt(request: SamplerRequest, template: PromptTemplate) -> str:
    """Few-shot examples, then the problem, then the chain, ending at the next marker."""
    blocks = [render_example(ex, template) for ex in template.few_shot_examples]
    lines = _problem_block(_request_premises(request), request.query_text,
                           render_formula(request.query_formula), template)
    for i, t in enumerate(request.chain, 1):
        lines += _step(template.step_marker, i, t.text, render_formula(t.formula))
    lines.append(f"{template.step_marker}{len(request.chain) + 1}.")
    blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


_RETURN = re.compile(r"^\s*return\s+(True|False)\s*\.?\s*$")


def parse_generation(raw, step_marker: str = "#") -> Thought:
    """Turn one model continuation into a :class:`Thought`.

    Anything after the next step marker is ignored. A ``return True`` or
    ``return False`` line makes the thought final; otherwise the first line
    that parses as a formula becomes its logic.
    """
    if isinstance(raw, (bytes, bytearray)):
        raw = bytes(raw).decode("utf-8", "replace")
    if not isinstance(raw, str):
        raise Unparseable(f"generation is {type(raw).__name__}, not text")
    marker = re.compile(r"^\s*" + re.escape(step_marker) + r"\s*\d+\s*\.?")
    lines: List[str] = []
    for line in raw.splitlines():
        m = marker.match(line)
        if m:
            if lines:
                break
            line = line[m.end():]
        line = line.strip()
        if line and not line.startswith("```"):
            lines.append(line)
    if not lines:
        raise Unparseable("empty generation")
    answer_at = next((i for i, line in enumerate(lines) if _RETURN.match(line)), None)
    body = lines if answer_at is None else lines[:answer_at]
    formula, logic_line = None, None
    for line in body[1:] + body[:1]:
        formula = try_parse(line)
        if formula is not None:
            logic_line = line
            break
    # the sentence is whichever line is not the logic, in either order
    prose = [line for line in body if line is not logic_line]
    text = prose[0] if prose else (body[0] if body else "")
    if answer_at is not None:
        answer = _RETURN.match(lines[answer_at]).group(1) == "True"
        return Thought(text, formula, True, answer)
    if formula is None:
        raise Unparseable(f"no logic line in generation {raw[:80]!r}")
    return Thought(text, formula)


@dataclass(frozen=True)
class CompletionConfig:
    endpoint_url: str
    model_name: str
    temperature: float = 0.7
    max_tokens: int = 128
    request_timeout: float = 60.0
    max_retries: int = 3
    max_inflight: int = 4
    backoff: float = 1.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.max_tokens < 1 or self.max_inflight < 1 or self.max_retries < 0:
            raise ValueError("max_tokens and max_inflight must be positive, max_retries non-negative")

    @classmethod
    def from_env(cls, **overrides) -> "CompletionConfig":
        endpoint = os.environ.get(ENV_ENDPOINT) or os.environ.get("OPENAI_BASE_URL")
        model = os.environ.get(ENV_MODEL) or os.environ.get("OPENAI_MODEL")
        if not endpoint or not model:
            raise LookupError(f"set {ENV_ENDPOINT} and {ENV_MODEL} to use the LLM sampler")
        return cls(endpoint, model, **overrides)

    @property
    def url(self) -> str:
        base = self.endpoint_url.rstrip("/")
        return base if base.endswith("/chat/completions") else base + "/chat/completions"


def endpoint_configured() -> bool:
    return bool((os.environ.get(ENV_ENDPOINT) or os.environ.get("OPENAI_BASE_URL"))
                and (os.environ.get(ENV_MODEL) or os.environ.get("OPENAI_MODEL")))


class LLMSampler(Sampler):
    """Issues ``n`` independent single-sample completions per request."""

    def __init__(self, config: CompletionConfig, template: PromptTemplate = None, *,
                 api_key: Optional[str] = None, client: Optional[httpx.Client] = None,
                 trace: Optional[Callable[[dict], None]] = None, sleep: Callable[[float], None] = time.sleep):
        self.config = config
        self.template = template or default_template()
        if api_key is None:
            api_key = os.environ.get(ENV_API_KEY) or os.environ.get("OPENAI_API_KEY")
        self.api_key = api_key
        self.client = client or httpx.Client(timeout=config.request_timeout)
        self.trace = trace
        self.sleep = sleep

    def _emit(self, record: dict) -> None:
        if self.trace is not None:
            self.trace(record)

    def complete(self, prompt: str, seed: Optional[int] = None) -> str:
        cfg = self.config
        payload = {
            "model": cfg.model_name,
            "messages": [{"role": "system", "content": SYSTEM_MESSAGE}, {"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
            "stop": ["\n" + self.template.step_marker],
        }
        if seed is not None:
            payload["seed"] = seed
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        status = None
        detail = ""
        for attempt in range(cfg.max_retries + 1):
            try:
                resp = self.client.post(cfg.url, json=payload, headers=headers, timeout=cfg.request_timeout)
            except httpx.HTTPError as exc:
                detail = str(exc)
            else:
                status = resp.status_code
                if status == 200:
                    try:
                        return resp.json()["choices"][0]["message"]["content"] or ""
                    except (ValueError, KeyError, IndexError, TypeError) as exc:
                        detail = f"malformed response: {exc}"
                elif 400 <= status < 500 and status not in (408, 409, 429):
                    raise TransportError(f"endpoint rejected the request ({status})", status)
                else:
                    detail = f"HTTP {status}"
            if attempt < cfg.max_retries:
                delay = cfg.backoff * (2 ** attempt) * (0.5 + random.random())
                log.warning("completion attempt %d failed (%s); retrying in %.2fs", attempt + 1, detail, delay)
                self.sleep(delay)
        raise TransportError(f"completion failed after {cfg.max_retries + 1} attempts: {detail}", status)

    def _one(self, prompt: str, seed: Optional[int]) -> Optional[Thought]:
        for attempt in range(self.config.max_retries + 1):
            raw = self.complete(prompt, None if seed is None else seed + 7919 * attempt)
            try:
                thought = parse_generation(raw, self.template.step_marker)
            except Unparseable:
                self._emit({"event": "generation", "raw": raw, "parsed": False})
                continue
            self._emit({"event": "generation", "raw": raw, "parsed": True, "thought": thought.to_dict()})
            return thought
        return None

    def sample_candidates(self, request: SamplerRequest) -> List[Thought]:
        if request.n > 1 and self.config.temperature <= 0:
            raise ValueError("distinct samples need a positive temperature")
        prompt = build_prompt(request, self.template)
        self._emit({"event": "prompt", "stream": list(request.stream), "prompt": prompt})
        base = sum(v * 1000003 ** i for i, v in enumerate(request.stream)) % (2 ** 31) if request.stream else None
        seeds = [None if base is None else base + i for i in range(request.n)]
        results: List[Optional[Thought]] = []
        errors: List[TransportError] = []
        with ThreadPoolExecutor(max_workers=min(self.config.max_inflight, request.n)) as pool:
            futures = [pool.submit(self._one, prompt, s) for s in seeds]
            for fut in futures:
                try:
                    results.append(fut.result())
                except TransportError as exc:
                    errors.append(exc)
        if errors and len(errors) == request.n:
            raise errors[-1]
        thoughts = dedupe(t for t in results if t is not None)
        if not thoughts:
            raise SamplerExhausted("no generation could be parsed")
        return thoughts
