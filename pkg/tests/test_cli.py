import json

import pytest

from pacs.cli import main


def test_score_prints_tuple(capsys):
    assert main(["score", "--formula", "Implies(a, b)"]) == 0
    assert capsys.readouterr().out.strip() == "(3, 2, 0, 7)"


def test_score_from_file_with_constants(tmp_path, capsys):
    f = tmp_path / "state.txt"
    f.write_text("# rule and a fact\nForAll(x, Implies(p(x), q(x)))\np(mia)\n")
    assert main(["score", "--file", str(f), "--constants", "mia", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["model_count"] == 1 and out["backbone_count"] == 2


def test_score_without_formulas_is_usage_error():
    assert main(["score"]) == 1


def test_score_bad_formula_is_runtime_error(capsys):
    assert main(["score", "--formula", "Implies(a,"]) == 2
    assert "position" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["eval"], ["eval", "--dataset", "x", "--k", "many"]])
def test_usage_errors_exit_one(argv):
    assert main(argv) == 1


def test_eval_writes_report(tmp_path):
    out = tmp_path / "report.jsonl"
    trace = tmp_path / "trace.jsonl"
    assert main(["eval", "--dataset", "bundled:synthetic", "--report", str(out), "--trace", str(trace)]) == 0
    lines = [json.loads(x) for x in out.read_text().splitlines()]
    assert lines[0]["type"] == "config" and lines[-1]["type"] == "aggregate"
    assert lines[-1]["accuracy"] == 1.0
    assert sum(x["type"] == "record" for x in lines) == 12
    assert trace.read_text().strip()


def test_eval_missing_dataset_exits_two(tmp_path):
    assert main(["eval", "--dataset", str(tmp_path / "nope.jsonl")]) == 2


def test_eval_strict_aborts_on_bad_line(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"id": "x", "premises": [], "query_logic": "And(", "label": true}\n')
    assert main(["eval", "--dataset", str(path), "--strict"]) == 2


def test_simulate_reports_gaps(tmp_path):
    out = tmp_path / "sim.jsonl"
    assert main(["simulate", "--report", str(out)]) == 0
    lines = [json.loads(x) for x in out.read_text().splitlines()]
    summary = lines[-1]
    assert summary["type"] == "summary" and summary["all_ok"] and summary["populations"] == 9
    assert all("greedy_minus_optimal" in x for x in lines[:-1])


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("method: sc\nk: 3\nsampler: population\n")
    out = tmp_path / "r.jsonl"
    assert main(["eval", "--dataset", "bundled:populations", "--method", "pacs", "--config", str(cfg),
                 "--report", str(out)]) == 0
    config = json.loads(out.read_text().splitlines()[0])
    assert config["method"] == "sc" and config["k"] == 3


def test_config_unknown_key_is_usage_error(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("beam_width: 9\n")
    assert main(["eval", "--dataset", "bundled:synthetic", "--config", str(cfg)]) == 1


def test_solve_presolved_record_needs_no_model(capsys):
    assert main(["solve", "--id", "bus_stop", "--sampler", "scripted"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "True" and out["halt_reason"] == "presolved"


def test_solve_unknown_id_exits_two():
    assert main(["solve", "--id", "missing", "--sampler", "scripted"]) == 2


def test_llm_without_endpoint_exits_two(monkeypatch):
    for var in ("PACS_LLM_ENDPOINT", "PACS_LLM_MODEL", "OPENAI_BASE_URL", "OPENAI_MODEL"):
        monkeypatch.delenv(var, raising=False)
    assert main(["solve", "--id", "bus_stop_open"]) == 2
