"""Scikit-learn style front end for the solver.

There is no training step: ``fit`` solves one instance and stores the result.
The class follows the estimator conventions (hyper-parameters in ``__init__``
and untouched there, fitted state in trailing-underscore attributes,
``get_params``/``set_params``/``clone`` support) so it composes with tooling
that expects them.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .domain import Instance
from .model import SchemeSpec
from .report import ReportBundle, summarize
from .solver import DEFAULT_MAX_CHECKS, Solution, solve


class FundRedistributor(BaseEstimator):
    """Maximize the number of funded campaigns under one redistribution scheme.

    Parameters
    ----------
    scheme : {"naive", "repurposing", "unordered", "ordered"}
    nice_level : {"all3nice", "nice12", "nice1only", "nonenice"}
        Most protective level to try first.
    ordering : {"relaxed", "strict"}
        Only used by the ordered scheme.
    ladder : bool
        Relax the optional constraints step by step when that funds more campaigns.
    tiebreak : bool
        Among optimal plans, prefer the one returning the least money to donors,
        then the one closest to the original contributions.
    max_checks : int or None
        Feasibility-check budget per large component; ``None`` means unlimited.
        Small components are always solved exactly.
    """

    def __init__(
        self,
        scheme="naive",
        nice_level="all3nice",
        ordering="relaxed",
        ladder=True,
        tiebreak=True,
        max_checks=DEFAULT_MAX_CHECKS,
    ):
        self.scheme = scheme
        self.nice_level = nice_level
        self.ordering = ordering
        self.ladder = ladder
        self.tiebreak = tiebreak
        self.max_checks = max_checks

    def _spec(self) -> SchemeSpec:
        return SchemeSpec(
            scheme=self.scheme,
            nice_level=self.nice_level,
            ordering=self.ordering,
            ladder=self.ladder,
            tiebreak=self.tiebreak,
        )

    def fit(self, instance: Instance, y=None) -> "FundRedistributor":
        self.spec_ = self._spec()
        self.solution_: Solution = solve(instance, self.spec_, max_checks=self.max_checks)
        self.instance_ = instance
        self.funded_ = self.solution_.funded
        self.plan_ = self.solution_.plan
        self.nice_level_ = self.solution_.nice_level
        return self

    def _check_fitted(self):
        if not hasattr(self, "solution_"):
            raise NotFittedError("call fit() first")

    def predict(self, instance: Instance | None = None) -> dict[str, bool]:
        """Funded flag per campaign id for the fitted instance (or a new one)."""
        if instance is not None and instance is not getattr(self, "instance_", None):
            self.fit(instance)
        self._check_fitted()
        return {cid: cid in self.funded_ for cid in self.instance_.campaign_ids}

    def transform(self, instance: Instance | None = None) -> ReportBundle:
        if instance is not None and instance is not getattr(self, "instance_", None):
            self.fit(instance)
        self._check_fitted()
        return summarize(self.instance_, self.solution_)

    def fit_transform(self, instance: Instance, y=None) -> ReportBundle:
        return self.fit(instance).transform()

    def score(self, instance: Instance | None = None, y=None) -> int:
        """Number of funded campaigns."""
        if instance is not None and instance is not getattr(self, "instance_", None):
            self.fit(instance)
        self._check_fitted()
        return len(self.funded_)
