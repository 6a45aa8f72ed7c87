"""
Diagnostic records emitted while fitting.
"""

from dataclasses import dataclass
from typing import Optional

from .base import Entity


@dataclass(frozen=True)
class AdmmRecord(Entity):
    """One ADMM iteration."""

    level: float
    start: int
    iteration: int
    objective: float
    primal_residual: float
    rho: float


@dataclass(frozen=True)
class LevelReport(Entity):
    """Summary of the selected ADMM run at one level."""

    level: float
    start: int
    iterations: int
    converged: bool
    primal_residual: float
    objective: float
    diverged_starts: int = 0
    error: Optional[str] = None
