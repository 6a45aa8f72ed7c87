"""
Fitted model entities: level classifiers, level grid and aggregated models.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .base import Entity
from .data import ResponseScale
from ..exceptions import ValidationException
from ..utils.helpers import frozen, nonzero_rows

# Slack on the bounded-intercept check for values written with 17 digits.
_INTERCEPT_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class TraceFunction(Entity):
    """
    One level's classifier phi(X) = <X, u v^T> + b + W^T c.

    The coefficient matrix is stored factored so that rank(B) <= r holds by
    construction; support is carried by zero rows of u and v.
    """

    u: np.ndarray
    v: np.ndarray
    intercept: float = 0.0
    covariate_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rank_budget: Optional[int] = None
    support_budget: Optional[Tuple[int, int]] = None
    level: float = 0.0

    def __post_init__(self):
        u = np.array(self.u, dtype=np.float64, ndmin=2)
        v = np.array(self.v, dtype=np.float64, ndmin=2)
        if u.ndim != 2 or v.ndim != 2 or u.shape[1] != v.shape[1]:
            raise ValidationException(f"factor shapes {u.shape} and {v.shape} do not agree")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValidationException("factors contain non-finite entries")
        coeffs = np.array(self.covariate_coeffs, dtype=np.float64).reshape(-1)
        r = u.shape[1] if self.rank_budget is None else int(self.rank_budget)
        s1, s2 = (u.shape[0], v.shape[0]) if self.support_budget is None else self.support_budget
        if u.shape[1] > r:
            raise ValidationException(f"factors carry {u.shape[1]} columns for rank budget {r}")
        if len(nonzero_rows(u)) > s1 or len(nonzero_rows(v)) > s2:
            raise ValidationException(f"factors exceed the support budget ({s1}, {s2})")
        if not np.isfinite(self.intercept):
            raise ValidationException("intercept must be finite")
        object.__setattr__(self, "u", frozen(u))
        object.__setattr__(self, "v", frozen(v))
        object.__setattr__(self, "covariate_coeffs", frozen(coeffs))
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "rank_budget", r)
        object.__setattr__(self, "support_budget", (int(s1), int(s2)))
        object.__setattr__(self, "level", float(self.level))
        bound = self.intercept_bound()
        if abs(self.intercept) > bound + _INTERCEPT_SLACK * max(1.0, bound):
            raise ValidationException(f"|intercept| = {abs(self.intercept)} exceeds ||B||_F + 1 = {bound}")

    @property
    def d1(self) -> int:
        return self.u.shape[0]

    @property
    def d2(self) -> int:
        return self.v.shape[0]

    @property
    def p(self) -> int:
        return self.covariate_coeffs.shape[0]

    def coefficient_matrix(self) -> np.ndarray:
        """Materialize B = u v^T."""
        return self.u @ self.v.T

    def intercept_bound(self) -> float:
        """Largest admissible |b|, namely ||B||_F + 1."""
        return float(np.linalg.norm(self.coefficient_matrix())) + 1.0

    def decision_function(self, predictors, covariates=None) -> np.ndarray:
        """
        Evaluate phi on one predictor (d1, d2) or a stack (m, d1, d2).

        Args:
            predictors: Matrix predictor(s)
            covariates: Covariates (p,) or (m, p); required when p > 0

        Returns:
            Scores of shape (m,)
        """
        stack = np.asarray(predictors, dtype=np.float64)
        if stack.ndim == 2:
            stack = stack[np.newaxis]
        if stack.ndim != 3 or stack.shape[1:] != (self.d1, self.d2):
            raise ValidationException(
                f"predictor shape {np.shape(predictors)} does not match ({self.d1}, {self.d2})"
            )
        m = stack.shape[0]
        # <X, u v^T> = sum_k u_k^T X v_k
        scores = np.einsum("mij,ik,jk->m", stack, self.u, self.v) + self.intercept
        if self.p > 0:
            if covariates is None:
                raise ValidationException(f"classifier needs {self.p} covariates")
            w = np.asarray(covariates, dtype=np.float64).reshape(m, -1)
            if w.shape[1] != self.p:
                raise ValidationException(f"got {w.shape[1]} covariates, expected {self.p}")
            scores = scores + w @ self.covariate_coeffs
        elif covariates is not None and np.size(covariates) > 0:
            raise ValidationException("classifier was fitted without covariates")
        return scores

    def scaled(self, alpha: float) -> "TraceFunction":
        """
        Return the classifier alpha * phi, alpha > 0, which has the same signs.

        u and v are scaled by sqrt(alpha) so that B, b and c all scale by alpha.
        """
        if not alpha > 0:
            raise ValidationException(f"scaling factor must be positive, got {alpha}")
        root = np.sqrt(alpha)
        return TraceFunction(
            u=self.u * root,
            v=self.v * root,
            intercept=self.intercept * alpha,
            covariate_coeffs=self.covariate_coeffs * alpha,
            rank_budget=self.rank_budget,
            support_budget=self.support_budget,
            level=self.level,
        )


def coefficient_matrix(tf: TraceFunction) -> np.ndarray:
    """
    Materialize the coefficient matrix of a trace function.

    Args:
        tf: Trace function

    Returns:
        d1 x d2 matrix u v^T
    """
    return tf.coefficient_matrix()


@dataclass(frozen=True)
class LevelGrid(Entity):
    """Equally spaced levels -1, ..., -1/H, 0, 1/H, ..., 1."""

    H: int

    def __post_init__(self):
        if isinstance(self.H, bool) or int(self.H) != self.H or int(self.H) < 1:
            raise ValidationException(f"resolution H must be a positive integer, got {self.H}")
        object.__setattr__(self, "H", int(self.H))

    @property
    def levels(self) -> np.ndarray:
        return np.arange(-self.H, self.H + 1, dtype=np.float64) / self.H

    def __len__(self) -> int:
        return 2 * self.H + 1


def _check_levels(grid: LevelGrid, classifiers: List[TraceFunction]) -> None:
    if len(classifiers) != len(grid):
        raise ValidationException(f"{len(classifiers)} classifiers for a grid of {len(grid)} levels")
    for k, (tf, level) in enumerate(zip(classifiers, grid.levels)):
        if abs(tf.level - level) > 1e-12:
            raise ValidationException(f"classifier {k} has level {tf.level}, grid expects {level}")


@dataclass(frozen=True, eq=False)
class SignSeriesModel(Entity):
    """Fitted model: one classifier per grid level plus the response scale."""

    grid: LevelGrid
    classifiers: List[TraceFunction]
    scale: ResponseScale
    dims: Tuple[int, int, int]

    def __post_init__(self):
        _check_levels(self.grid, self.classifiers)
        d1, d2, p = (int(x) for x in self.dims)
        for tf in self.classifiers:
            if (tf.d1, tf.d2, tf.p) != (d1, d2, p):
                raise ValidationException(
                    f"classifier dims {(tf.d1, tf.d2, tf.p)} differ from model dims {(d1, d2, p)}"
                )
        object.__setattr__(self, "classifiers", list(self.classifiers))
        object.__setattr__(self, "dims", (d1, d2, p))


@dataclass(frozen=True, eq=False)
class CompletionModel(Entity):
    """Fitted completion model: one factored score matrix Z = u v^T per level."""

    grid: LevelGrid
    sign_factors: List[TraceFunction]
    scale: ResponseScale
    shape: Tuple[int, int]

    def __post_init__(self):
        _check_levels(self.grid, self.sign_factors)
        d1, d2 = (int(x) for x in self.shape)
        for tf in self.sign_factors:
            if (tf.d1, tf.d2) != (d1, d2):
                raise ValidationException(f"factor dims {(tf.d1, tf.d2)} differ from model shape {(d1, d2)}")
        object.__setattr__(self, "sign_factors", list(self.sign_factors))
        object.__setattr__(self, "shape", (d1, d2))
