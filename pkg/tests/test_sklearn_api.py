import numpy as np
import pytest
from sklearn.base import clone

from pacs import PACSClassifier, SelfConsistencyClassifier
from pacs.sampling import ScriptedSampler


def test_params_round_trip_through_clone():
    est = PACSClassifier(n=4, m=2, seed=9)
    again = clone(est)
    assert again.get_params() == est.get_params()
    assert SelfConsistencyClassifier(k=7).get_params()["k"] == 7


def test_predict_on_synthetic(synthetic):
    est = PACSClassifier().fit(synthetic)
    pred = est.predict(synthetic)
    assert list(pred) == [r.label for r in synthetic]
    proba = est.predict_proba(synthetic)
    assert proba.shape == (12, 2) and np.allclose(proba.sum(axis=1), 1.0)
    assert list(est.classes_) == [False, True]


def test_score_uses_given_labels(synthetic):
    est = PACSClassifier().fit(synthetic)
    y = [r.label for r in synthetic]
    assert est.score(synthetic, y) == 1.0
    assert est.score(synthetic, [not v for v in y]) == 0.0


def test_accepts_dicts(synthetic):
    rows = [r.to_dict() for r in synthetic[:3]]
    assert list(PACSClassifier().fit(rows).predict(rows)) == [r.label for r in synthetic[:3]]


def test_abstain_is_none(synthetic):
    # a sampler with nothing to say leaves no paths
    est = PACSClassifier(sampler=ScriptedSampler({})).fit(synthetic[:1])
    rec = next(r for r in synthetic if r.id == "modus_ponens_gap")
    assert est.predict([rec])[0] is None
    assert est.predict_proba([rec])[0].tolist() == [0.5, 0.5]


def test_self_consistency_on_populations(pop_records):
    recs = [pop_records["unanimous"], pop_records["single_reasoner"]]
    est = SelfConsistencyClassifier(k=5, seed=1).fit(recs)
    assert list(est.predict(recs)) == [True, True]


def test_input_validation(synthetic):
    with pytest.raises(TypeError):
        PACSClassifier().fit("not records")
    with pytest.raises(ValueError):
        PACSClassifier().fit([])
    with pytest.raises(ValueError):
        PACSClassifier().fit(synthetic, [True])
    with pytest.raises(ValueError):
        PACSClassifier(sampler="oracle").fit(synthetic)


def test_unfitted_predict_raises(synthetic):
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        PACSClassifier().predict(synthetic)
