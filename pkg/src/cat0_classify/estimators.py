"""Estimator-style wrappers: ``fit`` builds a model for a group, ``transform``
returns fixed complexes, ``predict`` returns family tags.

``score`` is the fraction of battery rows that pass verification.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .classifying import (
    build_EFBC,
    build_EFIN,
    build_EVC,
    classify_family,
    verify_EFBC,
    verify_EFIN,
    verify_EVC,
)
from .cover import CoverPolicy
from .validation import (
    AXES_CHOICES,
    check_battery,
    check_choice,
    check_group,
    check_positive_int,
    check_rational,
)


class _ModelBuilder(BaseEstimator):
    family = "fin"

    def _policy(self) -> CoverPolicy:
        return CoverPolicy(divisor=check_positive_int(self.divisor, "divisor"))

    def fit(self, X, y=None):
        """``X`` is a preset name or a group object."""
        group = check_group(X, self.depth)
        self.window_ = check_rational(self.window_R, "window_R")
        self.group_ = group
        self.model_ = self._build(group)
        return self

    def fit_transform(self, X, y=None, **fit_params):
        """Fit on the group ``X`` and transform its default battery."""
        return self.fit(X, y).transform()

    def _rows(self, battery):
        return check_battery(battery, self.group_)

    def predict(self, X=None):
        """Family tag per battery row; ``X`` defaults to the group's battery."""
        check_is_fitted(self, "model_")
        return [classify_family(self.group_, r.generators).tag for r in self._rows(X)]

    def verify(self, X=None):
        check_is_fitted(self, "model_")
        return self._verify(self._rows(X))

    def score(self, X=None, y=None):
        rows = self.verify(X).rows
        return sum(r.passed for r in rows) / len(rows) if rows else 1.0


class EFINBuilder(_ModelBuilder):
    """Nerve of a good cover; its fixed sets are contractible exactly for finite subgroups."""

    family = "fin"

    def __init__(self, window_R=2, divisor=2, depth=12, max_M=64):
        self.window_R = window_R
        self.divisor = divisor
        self.depth = depth
        self.max_M = max_M

    def _build(self, group):
        return build_EFIN(group, self.window_, self._policy(), max_M=self.max_M)

    def _verify(self, rows):
        return verify_EFIN(self.model_, rows)

    def transform(self, X=None):
        check_is_fitted(self, "model_")
        return [self.model_.fixed(r.generators) for r in self._rows(X)]


class EVCBuilder(_ModelBuilder):
    """Join of the cover nerve with the nerve of a cover of the axes space."""

    family = "vc"

    def __init__(self, window_R=2, axes_bound=1, axes_choice="enumerated", divisor=2, depth=12, seed=0):
        self.window_R = window_R
        self.axes_bound = axes_bound
        self.axes_choice = axes_choice
        self.divisor = divisor
        self.depth = depth
        self.seed = seed

    def _build(self, group):
        check_choice(self.axes_choice, "axes_choice", AXES_CHOICES)
        bound = check_rational(self.axes_bound, "axes_bound")
        return build_EVC(group, self.window_, bound, self.axes_choice, self._policy(), self.seed)

    def _verify(self, rows):
        return verify_EVC(self.model_, rows)

    def transform(self, X=None):
        """(fixed part of the cover nerve, fixed part of the axes nerve) per row."""
        check_is_fitted(self, "model_")
        m = self.model_
        out = []
        for r in self._rows(X):
            fu = m.efin.complex.full_subcomplex(m.efin.action.fixed_vertices(r.generators))
            fv = m.axes_cover.complex.full_subcomplex(m.axes_action.fixed_vertices(r.generators))
            out.append((fu, fv))
        return out


class EFBCBuilder(EVCBuilder):
    """Join of the cover nerve with the quotient of the doubled axes nerve by the antipodal sphere."""

    family = "fbc"

    def __init__(self, window_R=2, axes_bound=1, axes_choice="enumerated", sphere_dim=3, divisor=2, depth=12, seed=0):
        super().__init__(window_R, axes_bound, axes_choice, divisor, depth, seed)
        self.sphere_dim = sphere_dim

    def _build(self, group):
        evc = super()._build(group)
        n = check_positive_int(self.sphere_dim, "sphere_dim")
        return build_EFBC(group, self.window_, evc=evc, N=n)

    def _verify(self, rows):
        return verify_EFBC(self.model_, rows)

    def transform(self, X=None):
        """(fixed part of the cover nerve, fixed cells of K) per row."""
        check_is_fitted(self, "model_")
        m = self.model_
        out = []
        for r in self._rows(X):
            fu = m.evc.efin.complex.full_subcomplex(m.evc.efin.action.fixed_vertices(r.generators))
            out.append((fu, m.K.fixed_cells(r.generators)))
        return out


__all__ = ["EFINBuilder", "EVCBuilder", "EFBCBuilder"]
