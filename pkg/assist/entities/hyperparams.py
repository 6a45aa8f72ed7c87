"""
Hyperparameter entity governing a fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import ClassVar, Dict, Optional

from .base import Entity
from .. import constants
from ..constants import LossKind
from ..exceptions import InfeasibleBudgetException, ValidationException


@dataclass(frozen=True)
class Hyperparams(Entity):
    """
    Budgets, resolution, ridge weight, loss and ADMM controls.

    ``H`` and ``lam`` may be left as None and are then filled from the sample
    size by :meth:`resolve`. On the wire ``lam`` is called ``lambda``.
    """

    field_aliases: ClassVar[Dict[str, str]] = {"lam": "lambda"}

    r: int = 1
    s1: int = 1
    s2: int = 1
    H: Optional[int] = None
    lam: Optional[float] = None
    loss: LossKind = LossKind.HINGE
    rho0: float = constants.DEFAULT_RHO0
    rho_growth: float = constants.DEFAULT_RHO_GROWTH
    max_admm_iters: int = constants.DEFAULT_MAX_ADMM_ITERS
    max_inner_iters: int = constants.DEFAULT_MAX_INNER_ITERS
    primal_tol: float = constants.DEFAULT_PRIMAL_TOL
    n_starts: int = constants.DEFAULT_N_STARTS
    seed: int = 0

    def __post_init__(self):
        try:
            loss = LossKind(self.loss)
        except ValueError:
            raise ValidationException(f"unknown loss {self.loss!r}; expected one of {[k.value for k in LossKind]}")
        object.__setattr__(self, "loss", loss)
        for name in ("r", "s1", "s2", "max_admm_iters", "max_inner_iters", "n_starts"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or int(value) < 1:
                raise ValidationException(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.H is not None:
            if int(self.H) != self.H or int(self.H) < 1:
                raise ValidationException(f"H must be a positive integer, got {self.H!r}")
            object.__setattr__(self, "H", int(self.H))
        if self.lam is not None and not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValidationException(f"lambda must be finite and >= 0, got {self.lam!r}")
        if not (self.rho0 > 0 and math.isfinite(self.rho0)):
            raise ValidationException(f"rho0 must be positive, got {self.rho0!r}")
        if not (self.rho_growth > 1 and math.isfinite(self.rho_growth)):
            raise ValidationException(f"rho_growth must exceed 1, got {self.rho_growth!r}")
        if not (self.primal_tol > 0):
            raise ValidationException(f"primal_tol must be positive, got {self.primal_tol!r}")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def complexity(self) -> int:
        """Parsimony key r * (s1 + s2)."""
        return self.r * (self.s1 + self.s2)

    def check_dims(self, d1: int, d2: int) -> None:
        """
        Verify 1 <= r <= min(s1, s2) and s1 <= d1, s2 <= d2.

        Raises:
            InfeasibleBudgetException: When the budgets do not fit
        """
        if not (1 <= self.r <= min(self.s1, self.s2) and self.s1 <= d1 and self.s2 <= d2):
            raise InfeasibleBudgetException(self.r, self.s1, self.s2, d1, d2)

    def resolve(self, n: int) -> "Hyperparams":
        """
        Fill unset H and lambda from the sample size.

        Defaults are H = min(20, floor(sqrt(n))) and lambda = min(0.1, 1/n).

        Args:
            n: Number of training samples (or observed entries)

        Returns:
            Hyperparams with H and lam set
        """
        if n < 1:
            raise ValidationException(f"sample size must be positive, got {n}")
        H = self.H if self.H is not None else max(1, min(constants.MAX_DEFAULT_RESOLUTION, math.isqrt(n)))
        lam = self.lam if self.lam is not None else min(constants.MAX_DEFAULT_LAMBDA, 1.0 / n)
        return replace(self, H=H, lam=lam)

    def with_overrides(self, **overrides) -> "Hyperparams":
        """
        Return a copy with the given fields replaced; None values are ignored.

        Keys may use the wire name ``lambda``.
        """
        known = {f.name for f in fields(self)}
        changes = {}
        for key, value in overrides.items():
            name = "lam" if key == "lambda" else key
            if value is None:
                continue
            if name not in known:
                raise ValidationException(f"unknown hyperparameter {key!r}")
            changes[name] = value
        return replace(self, **changes)

    @classmethod
    def from_config(cls, data: Dict) -> "Hyperparams":
        """
        Build hyperparameters from a flat config mapping, rejecting unknown keys.

        Args:
            data: Mapping with Hyperparams wire names

        Returns:
            Hyperparams instance
        """
        wire_names = {cls.field_aliases.get(f.name, f.name) for f in fields(cls)}
        unknown = sorted(set(data) - wire_names)
        if unknown:
            raise ValidationException(f"unknown config keys: {', '.join(unknown)}")
        if not data:
            return cls()
        return cls.from_dict(data)
