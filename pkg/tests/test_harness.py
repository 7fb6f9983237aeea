import json
import logging
from fractions import Fraction

import pytest
from statsmodels.stats.proportion import proportion_confint

from pacs.estimator import EmptySampleSet, Verdict, estimate_ap, exact_ap
from pacs.harness import (
    DatasetError,
    EvalConfig,
    bundled_path,
    compute_metrics,
    load_dataset,
    load_dataset_with_diagnostics,
    population_factory,
    run_eval,
    scripted_factory,
    wilson_interval,
)


# -- estimator ------------------------------------------------------------------

def test_majority_and_abstain():
    assert estimate_ap([True, True, False]).verdict is Verdict.TRUE
    assert estimate_ap([True, False, False]).verdict is Verdict.FALSE
    tie = estimate_ap([True, False])
    assert tie.verdict is Verdict.ABSTAIN and tie.ap_hat == 0.5
    assert not Verdict.ABSTAIN.matches(True) and not Verdict.ABSTAIN.matches(False)
    with pytest.raises(EmptySampleSet):
        estimate_ap([])


def test_exact_ap_of_fixture(pop_records):
    rec = pop_records["split_70_30"]
    problem = rec.problem()
    assert exact_ap(problem, rec.reasoner_population(problem)) == Fraction(7, 10)


# -- datasets ---------------------------------------------------------------------

def test_bundled_synthetic_has_twelve_records(synthetic):
    assert len(synthetic) == 12
    assert len({r.id for r in synthetic}) == 12


def test_bad_logic_reports_line_and_position(tmp_path):
    good = json.loads(bundled_path("synthetic").read_text().splitlines()[0])
    bad = dict(good, id="bad", query_logic="Implies(a, ")
    path = tmp_path / "d.jsonl"
    path.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n")
    records, problems = load_dataset_with_diagnostics(path)
    assert [r.id for r in records] == [good["id"]]
    assert problems[0].line == 2 and "position" in str(problems[0])
    with pytest.raises(DatasetError) as err:
        load_dataset(path, strict=True)
    assert err.value.line == 2


def test_missing_label_rejected(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text(json.dumps({"id": "x", "premises": [], "query_logic": "a"}) + "\n")
    with pytest.raises(DatasetError, match="label"):
        load_dataset(path, strict=True)


def test_duplicate_json_keys_rejected(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"id": "x", "premises": [], "query_logic": "a", "label": true, '
                    '"script": {"": [], "": []}}\n')
    assert load_dataset(path) == []


def test_premises_accept_pairs(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text(json.dumps({"id": "x", "premises": [["It rains.", "rain"]], "query_logic": "rain",
                                "label": "True"}) + "\n")
    (rec,) = load_dataset(path)
    assert rec.premises == (("It rains.", "rain"),) and rec.label is True


def test_empty_file_warns(tmp_path, caplog):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with caplog.at_level(logging.WARNING):
        assert load_dataset(path) == []
    assert "no records" in caplog.text


# -- metrics --------------------------------------------------------------------

@pytest.mark.parametrize("k, n", [(10, 10), (0, 10), (7, 12), (1, 1), (33, 50)])
def test_wilson_matches_statsmodels(k, n):
    lo, hi = wilson_interval(k, n)
    ref = proportion_confint(k, n, alpha=0.05, method="wilson")
    assert lo == pytest.approx(ref[0], abs=1e-12) and hi == pytest.approx(ref[1], abs=1e-12)


def test_ten_of_ten():
    lo, hi = wilson_interval(10, 10)
    assert round(lo, 3) == 0.722 and hi == 1.0


def _row(correct, answers, label=True, depths=(), verdict=None, calls=1):
    return {"correct": correct, "answers": answers, "label": label, "depths": list(depths),
            "verdict": verdict or ("True" if correct else "False"), "sampler_calls": calls}


def test_mean_path_length_pools_all_paths():
    m = compute_metrics([_row(True, [True, True], depths=[4, 6]), _row(True, [True], depths=[3])])
    assert m.mean_path_length == pytest.approx(13 / 3)
    assert m.never_correct_rate == 0.0


def test_abstain_counts_incorrect():
    m = compute_metrics([_row(True, [True]), _row(False, [True, False], verdict="Abstain")])
    assert m.accuracy == 0.5 and m.abstained == 1
    assert m.ci_low <= m.accuracy <= m.ci_high


def test_never_correct():
    m = compute_metrics([_row(False, [False, False]), _row(False, [])])
    assert m.never_correct_rate == 1.0


# -- evaluation -------------------------------------------------------------------

def test_pacs_on_synthetic_is_perfect(synthetic):
    report = run_eval(synthetic, "pacs", scripted_factory, EvalConfig(seed=7))
    assert report.metrics.accuracy == 1.0
    assert all(r.error is None for r in report.rows)


def test_report_is_reproducible_and_order_stable(synthetic):
    a = run_eval(synthetic, "pacs", scripted_factory, EvalConfig(seed=3))
    b = run_eval(synthetic, "pacs", scripted_factory, EvalConfig(seed=3, workers=4))
    assert a.dumps(wall_time=False) == b.dumps(wall_time=False).replace('"workers": 4', '"workers": 1')
    assert [r.id for r in a.rows] == [r.id for r in synthetic]


def test_population_runs_reproduce(pop_records):
    recs = list(pop_records.values())
    a = run_eval(recs, "sc", population_factory(4), EvalConfig(method="sc", k=5, seed=4))
    b = run_eval(recs, "sc", population_factory(4), EvalConfig(method="sc", k=5, seed=4))
    assert a.dumps(wall_time=False) == b.dumps(wall_time=False)


def test_cot_is_sc_with_one_sample(pop_records):
    recs = list(pop_records.values())
    cot = run_eval(recs, "cot", population_factory(2), EvalConfig(method="cot", k=20, seed=2))
    sc1 = run_eval(recs, "sc", population_factory(2), EvalConfig(method="sc", k=1, seed=2))
    strip = lambda rep: [{**r.as_dict(False)} for r in rep.rows]
    assert strip(cot) == strip(sc1)
    assert all(r.k == 1 for r in cot.rows)


def test_failures_become_abstentions(synthetic):
    # population sampler on records without a population block
    report = run_eval(synthetic[:2], "pacs", population_factory(0), EvalConfig())
    assert all(r.verdict == "Abstain" and r.error for r in report.rows)
    assert report.metrics.accuracy == 0.0


def test_aggregate_recomputes_from_rows(synthetic, tmp_path):
    report = run_eval(synthetic, "pacs", scripted_factory, EvalConfig(seed=1))
    path = tmp_path / "r.jsonl"
    report.write(path)
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    rows = [x for x in lines if x["type"] == "record"]
    agg = lines[-1]
    # recompute by hand, independently of compute_metrics
    n = len(rows)
    correct = sum(1 for r in rows if r["verdict"] == str(r["label"]))
    depths = [d for r in rows for d in r["depths"]]
    assert agg["accuracy"] == correct / n
    assert agg["mean_path_length"] == pytest.approx(sum(depths) / len(depths))
    assert agg["mean_sampler_calls"] == pytest.approx(sum(r["sampler_calls"] for r in rows) / n)
    lo, hi = proportion_confint(correct, n, method="wilson")
    assert agg["ci_low"] == pytest.approx(lo) and agg["ci_high"] == pytest.approx(hi)
    assert agg["accuracy"] + sum(1 for r in rows if not r["correct"]) / n == pytest.approx(1.0)
