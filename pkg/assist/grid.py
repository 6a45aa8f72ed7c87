"""
Hyperparameter grid building utilities.
"""

import itertools
from typing import Any, Dict, List, Optional, Sequence

from .entities import Hyperparams
from .exceptions import ValidationException


class GridBuilder:
    """Builder for hyperparameter grids over ranks, supports, ridge weights and losses."""

    def __init__(self, base: Optional[Hyperparams] = None):
        """
        Initialize a new grid builder.

        Args:
            base: Template whose remaining fields every grid point inherits
        """
        self._base = base or Hyperparams()
        self._ranks: List[int] = []
        self._row_supports: List[int] = []
        self._col_supports: List[int] = []
        self._square = True
        self._lambdas: List[Optional[float]] = []
        self._resolutions: List[Optional[int]] = []
        self._losses: List[str] = []

    def base(self, hp: Hyperparams) -> "GridBuilder":
        """
        Set the template hyperparameters.

        Args:
            hp: Template

        Returns:
            Self for method chaining
        """
        self._base = hp
        return self

    def ranks(self, *values: int) -> "GridBuilder":
        """
        Add rank budgets.

        Args:
            values: Candidate r values

        Returns:
            Self for method chaining
        """
        self._ranks.extend(int(v) for v in values)
        return self

    def supports(self, *values: int) -> "GridBuilder":
        """
        Add support budgets used for both rows and columns.

        Args:
            values: Candidate s values

        Returns:
            Self for method chaining
        """
        self._row_supports.extend(int(v) for v in values)
        self._col_supports.extend(int(v) for v in values)
        return self

    def support_range(self, start: int, stop: int, increment: int = 5) -> "GridBuilder":
        """
        Add supports start, start + increment, ... up to and including stop.

        Args:
            start: Smallest support
            stop: Largest support
            increment: Step between supports

        Returns:
            Self for method chaining
        """
        if increment < 1 or start < 1 or stop < start:
            raise ValidationException(f"invalid support range ({start}, {stop}, {increment})")
        return self.supports(*range(start, stop + 1, increment))

    def row_supports(self, *values: int) -> "GridBuilder":
        """Add row support budgets and allow s1 != s2."""
        self._square = False
        self._row_supports.extend(int(v) for v in values)
        return self

    def col_supports(self, *values: int) -> "GridBuilder":
        """Add column support budgets and allow s1 != s2."""
        self._square = False
        self._col_supports.extend(int(v) for v in values)
        return self

    def lambdas(self, *values: float) -> "GridBuilder":
        """Add ridge weights."""
        self._lambdas.extend(float(v) for v in values)
        return self

    def resolutions(self, *values: int) -> "GridBuilder":
        """Add level resolutions H."""
        self._resolutions.extend(int(v) for v in values)
        return self

    def losses(self, *values: str) -> "GridBuilder":
        """Add surrogate losses."""
        self._losses.extend(values)
        return self

    def build(self) -> List[Hyperparams]:
        """
        Expand the grid, keeping only points with r <= min(s1, s2).

        Returns:
            Hyperparams in deterministic order (ranks outermost)
        """
        base = self._base
        ranks = _dedupe(self._ranks) or [base.r]
        rows = _dedupe(self._row_supports) or [base.s1]
        cols = _dedupe(self._col_supports) or [base.s2]
        if self._square:
            pairs = [(s, s) for s in rows]
        else:
            pairs = list(itertools.product(rows, cols))
        lambdas = _dedupe(self._lambdas) or [base.lam]
        resolutions = _dedupe(self._resolutions) or [base.H]
        losses = _dedupe(self._losses) or [base.loss]

        grid = []
        for r, (s1, s2), lam, H, loss in itertools.product(ranks, pairs, lambdas, resolutions, losses):
            if r > min(s1, s2):
                continue
            grid.append(base.with_overrides(r=r, s1=s1, s2=s2, lam=lam, H=H, loss=loss))
        if not grid:
            raise ValidationException("grid is empty after applying r <= min(s1, s2)")
        return grid

    @classmethod
    def from_config(cls, data: Dict[str, Any]) -> "GridBuilder":
        """
        Build from a grid config mapping.

        Recognized keys: "base" (hyperparameter mapping), "r", "s", "s1", "s2",
        "lambda", "H", "loss" (lists of candidates) and "increment" with
        "s_range" = [start, stop].

        Args:
            data: Grid config

        Returns:
            GridBuilder instance
        """
        known = {"base", "r", "s", "s1", "s2", "lambda", "H", "loss", "s_range", "increment"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationException(f"unknown grid keys: {', '.join(unknown)}")
        builder = cls(Hyperparams.from_config(data.get("base", {})))
        builder.ranks(*_as_list(data.get("r")))
        builder.supports(*_as_list(data.get("s")))
        if "s_range" in data:
            start, stop = data["s_range"]
            builder.support_range(start, stop, data.get("increment", 5))
        if "s1" in data or "s2" in data:
            builder.row_supports(*_as_list(data.get("s1")))
            builder.col_supports(*_as_list(data.get("s2")))
        builder.lambdas(*_as_list(data.get("lambda")))
        builder.resolutions(*_as_list(data.get("H")))
        builder.losses(*_as_list(data.get("loss")))
        return builder


def _as_list(value) -> Sequence:
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return value
    return [value]


def _dedupe(values: Sequence) -> list:
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen
