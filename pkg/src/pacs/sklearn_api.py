"""Estimator-style wrappers: records in, True/False/None verdicts out."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .estimator import Verdict
from .harness.evaluate import EvalConfig, evaluate_record, population_factory, scripted_factory, shared_factory
from .sampling import Sampler
from .search import SearchConfig
from .validation import check_labels, check_records, with_labels


class _VotingClassifier(ClassifierMixin, BaseEstimator):
    method = "pacs"

    def _factory(self):
        if isinstance(self.sampler, Sampler):
            return shared_factory(self.sampler)
        if self.sampler == "scripted":
            return scripted_factory
        if self.sampler == "population":
            return population_factory(self.seed, self.order)
        raise ValueError(f"sampler must be 'scripted', 'population' or a Sampler, got {self.sampler!r}")

    def _config(self) -> EvalConfig:
        # self-consistency never builds a beam, so it has no n, m or time limit
        search = SearchConfig(n=getattr(self, "n", 1), m=getattr(self, "m", 1), max_steps=self.max_steps,
                              wall_time_limit=getattr(self, "time_limit", 120.0))
        return EvalConfig(method=self.method, search=search, k=getattr(self, "k", 1), seed=self.seed)

    def fit(self, X, y=None):
        records = check_records(X)
        if y is not None:
            check_labels(y, len(records))
        self._factory()
        self._config()
        self.classes_ = np.array([False, True])
        return self

    def evaluate(self, X):
        """Per-record result rows, as the harness reports them."""
        check_is_fitted(self, "classes_")
        records = check_records(X)
        factory, config = self._factory(), self._config()
        return [evaluate_record(r, factory, config) for r in records]

    def predict(self, X) -> np.ndarray:
        """``True``/``False`` per record, ``None`` where the vote abstains."""
        rows = self.evaluate(X)
        return np.array([Verdict(r.verdict).as_bool() for r in rows], dtype=object)

    def predict_proba(self, X) -> np.ndarray:
        """Columns follow ``classes_``; records with no paths get 0.5/0.5."""
        rows = self.evaluate(X)
        ap = np.array([0.5 if r.ap_hat is None else r.ap_hat for r in rows], dtype=float)
        return np.column_stack([1.0 - ap, ap])

    def score(self, X, y, sample_weight=None):
        """Accuracy with abstentions counted wrong."""
        records = check_records(X)
        y = check_labels(y, len(records))
        check_is_fitted(self, "classes_")
        factory, config = self._factory(), self._config()
        rows = [evaluate_record(r, factory, config) for r in with_labels(records, y)]
        correct = np.array([r.correct for r in rows], dtype=float)
        return float(np.average(correct, weights=sample_weight))


class PACSClassifier(_VotingClassifier):
    """Scored beam search, then a majority vote over completed paths."""

    method = "pacs"

    def __init__(self, sampler="scripted", n=5, m=3, max_steps=8, time_limit=120.0, seed=0, order="forward"):
        self.sampler = sampler
        self.n = n
        self.m = m
        self.max_steps = max_steps
        self.time_limit = time_limit
        self.seed = seed
        self.order = order


class SelfConsistencyClassifier(_VotingClassifier):
    """``k`` unguided chains and a majority vote; ``k=1`` is plain chain of thought."""

    method = "sc"

    def __init__(self, sampler="population", k=20, max_steps=8, seed=0, order="forward"):
        self.sampler = sampler
        self.k = k
        self.max_steps = max_steps
        self.seed = seed
        self.order = order
