import json
import re
import threading

import httpx
import pytest

from pacs.harness import load_dataset
from pacs.llm import (
    CompletionConfig,
    LLMSampler,
    TransportError,
    Unparseable,
    build_prompt,
    default_template,
    parse_generation,
)
from pacs.sampling import SamplerExhausted, SamplerRequest, Thought
from pacs.search import run_search


@pytest.fixture
def bus_stop():
    return {r.id: r for r in load_dataset("bundled:bus_stop")}


def _request(rec, chain=(), n=1):
    return SamplerRequest.for_problem(rec.problem(), chain, n, (0, 0, 0))


def test_prompt_layout(bus_stop):
    rec = bus_stop["bus_stop"]
    chain = (Thought.step("Since the daughter walks out alone, she is becoming independent.",
                          "Implies(walk_out_alone(her), independent(her))"),)
    prompt = build_prompt(_request(rec, chain), default_template())
    tail = prompt.split("\n\n")[-1].splitlines()
    assert tail[:3] == ["Here is some context:", "# The girl is the narrator's daughter.", "my_daughter(her)"]
    assert "# Question: Why might I not walk her to the bus stop ?" in tail
    assert tail[tail.index("Let's think step by step:") - 1] == \
        "return Implies(old_enough(her), walk_out_alone(her))"
    assert tail[-4:] == ["#1.", chain[0].text, "Implies(walk_out_alone(her), independent(her))", "#2."]


def test_template_has_four_examples_with_a_forall():
    t = default_template()
    assert len(t.few_shot_examples) == 4
    assert any("ForAll(" in logic for ex in t.few_shot_examples for _, logic in ex.premises + ex.steps)
    assert {ex.answer for ex in t.few_shot_examples} == {True, False}


@pytest.mark.parametrize("raw, text, logic, answer", [
    ("Children become independent as they get older.\nImplies(independent(her), getting_older(her))",
     "Children become independent as they get older.", "Implies(independent(her), getting_older(her))", None),
    ("Implies(a, b)\nbecause a gives b", "because a gives b", "Implies(a, b)", None),
    ("Therefore, the student's answer is correct.\nreturn True", "Therefore, the student's answer is correct.",
     None, True),
    ("So it is false.\nNot(b)\nreturn False.", "So it is false.", "Not(b)", False),
    ("first\nrain(x)\n#3. second\nsnow(x)", "first", "rain(x)", None),
    ("#2. text after marker\nwet(x)", "text after marker", "wet(x)", None),
])
def test_parse_generation(raw, text, logic, answer):
    t = parse_generation(raw)
    assert t.text == text
    assert (str(t.formula) if t.formula is not None else None) == logic
    assert t.declared_answer == answer


@pytest.mark.parametrize("raw", ["", "   \n", "just prose here\nand more prose", b"\xff\xfe", 7])
def test_parse_generation_rejects(raw):
    with pytest.raises(Unparseable):
        parse_generation(raw)


def _chat(content):
    return httpx.Response(200, json={"choices": [{"message": {"content": content}}]})


def _sampler(handler, **kw):
    cfg = CompletionConfig("http://llm.test/v1", "test-model", max_retries=kw.pop("max_retries", 2),
                           backoff=0.0, **kw)
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return LLMSampler(cfg, api_key="k", client=client, sleep=lambda s: None)


def test_sampler_issues_n_independent_requests(bus_stop):
    seen = []
    lock = threading.Lock()

    def handler(request):
        body = json.loads(request.content)
        with lock:
            seen.append(body)
        i = len(seen)
        return _chat(f"thought {i}\nstep{i}(her)")

    s = _sampler(handler)
    out = s.sample_candidates(_request(bus_stop["bus_stop_open"], n=3))
    assert len(seen) == 3 and len(out) == 3
    assert all(b["model"] == "test-model" and b["temperature"] == 0.7 for b in seen)
    assert seen[0]["messages"][-1]["content"].endswith("#1.")


def test_sampler_dedupes_identical_generations(bus_stop):
    s = _sampler(lambda r: _chat("same\nsame_thing(her)"))
    assert len(s.sample_candidates(_request(bus_stop["bus_stop_open"], n=4))) == 1


def test_retry_then_success(bus_stop):
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] < 3:
            return httpx.Response(503)
        return _chat("ok\nok(her)")

    s = _sampler(handler)
    (t,) = s.sample_candidates(_request(bus_stop["bus_stop_open"]))
    assert str(t.formula) == "ok(her)" and calls["n"] == 3


def test_retries_exhausted_raise_transport_error(bus_stop):
    s = _sampler(lambda r: httpx.Response(500), max_retries=1)
    with pytest.raises(TransportError) as err:
        s.sample_candidates(_request(bus_stop["bus_stop_open"]))
    assert err.value.status == 500


def test_client_errors_are_not_retried(bus_stop):
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        return httpx.Response(401)

    with pytest.raises(TransportError):
        _sampler(handler).sample_candidates(_request(bus_stop["bus_stop_open"]))
    assert calls["n"] == 1


def test_network_errors_are_retried(bus_stop):
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] == 1:
            raise httpx.ConnectError("refused")
        return _chat("fine\nfine(her)")

    assert _sampler(handler).sample_candidates(_request(bus_stop["bus_stop_open"]))


def test_unparseable_everywhere_exhausts(bus_stop):
    s = _sampler(lambda r: _chat("I am not sure what to say here."))
    with pytest.raises(SamplerExhausted):
        s.sample_candidates(_request(bus_stop["bus_stop_open"], n=2))


def test_zero_temperature_with_many_samples_rejected(bus_stop):
    s = _sampler(lambda r: _chat("x\nx(her)"), temperature=0.0)
    with pytest.raises(ValueError):
        s.sample_candidates(_request(bus_stop["bus_stop_open"], n=2))


def test_config_from_env(monkeypatch):
    monkeypatch.setenv("PACS_LLM_ENDPOINT", "http://x/v1")
    monkeypatch.setenv("PACS_LLM_MODEL", "m")
    cfg = CompletionConfig.from_env(temperature=0.5)
    assert cfg.url == "http://x/v1/chat/completions" and cfg.temperature == 0.5
    monkeypatch.delenv("PACS_LLM_ENDPOINT")
    monkeypatch.delenv("OPENAI_BASE_URL", raising=False)
    with pytest.raises(LookupError):
        CompletionConfig.from_env()


def test_search_with_mocked_model_follows_worked_chain(bus_stop):
    # replays the bus-stop reasoning one step per call, keyed on chain length
    steps = [
        "Children become independent as they get older.\nImplies(independent(her), getting_older(her))",
        "When a child gets older, they eventually become old enough.\n"
        "Implies(getting_older(her), old_enough(her))",
    ]

    def handler(request):
        prompt = json.loads(request.content)["messages"][-1]["content"]
        depth = len(re.findall(r"^#\d+\.$", prompt.split("\n\n")[-1], re.M)) - 1
        return _chat(steps[min(depth, len(steps) - 1)])

    s = _sampler(handler)
    rec = bus_stop["bus_stop_open"]
    paths = run_search(rec.problem(), s)
    assert paths and all(p.answer for p in paths)
    assert all(t.formula is not None for p in paths for t in p.chain if not t.is_final)
