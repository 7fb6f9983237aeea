"""Abductive reasoning by scored search over chains of thought."""

from .estimator import Estimate, Verdict, estimate_ap, exact_ap
from .logic import parse_formula, render_formula
from .problem import ProblemInstance
from .sampling import PopulationSampler, Sampler, ScriptedSampler, Thought
from .search import CompletedPath, NoPathsFound, SearchConfig, StopReason, run_search
from .sklearn_api import PACSClassifier, SelfConsistencyClassifier

__version__ = "0.1.0"
