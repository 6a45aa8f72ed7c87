"""
ADMM solver for one level's weighted large-margin classification problem.

The augmented objective alternates a ridge-penalized margin minimization
over (B, b, c), a projection of the dual variable S onto the rank/support
constraint set and a multiplier update.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from . import constants
from .constants import LossKind
from .entities import AdmmRecord, Dataset, Hyperparams, LevelReport, ObservedMatrix, TraceFunction
from .exceptions import SolverDivergenceException, ValidationException
from .loss import hinge, psi
from .projection import check_budgets, factorize, project_sparse_lowrank
from .utils.helpers import hash64, make_rng, sgn

logger = logging.getLogger("assist.admm")

Sink = Callable[[AdmmRecord], None]
Budgets = Tuple[int, int, int]
Point = Tuple[np.ndarray, float, np.ndarray]


class MatrixDesign:
    """Trace evaluation <X_i, B> over a stack of dense predictors."""

    def __init__(self, predictors: np.ndarray):
        n, d1, d2 = predictors.shape
        self.shape = (d1, d2)
        self._flat = predictors.reshape(n, d1 * d2)

    def scores(self, B: np.ndarray) -> np.ndarray:
        return self._flat @ B.reshape(-1)

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        """sum_i g_i X_i"""
        return (self._flat.T @ g).reshape(self.shape)


class EntryDesign:
    """Trace evaluation against basis matrices e_i e_j^T, i.e. entry lookup B[i, j]."""

    def __init__(self, d1: int, d2: int, rows: np.ndarray, cols: np.ndarray):
        self.shape = (d1, d2)
        self._rows = rows
        self._cols = cols
        self.flat_index = rows * d2 + cols

    def scores(self, B: np.ndarray) -> np.ndarray:
        return B[self._rows, self._cols]

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        # Duplicated entries accumulate.
        return np.bincount(self.flat_index, weights=g, minlength=self.shape[0] * self.shape[1]).reshape(self.shape)


@dataclass
class WeightedProblem:
    """
    Weighted classification problem at one level.

    The margin risk is ``normalizer * sum_i w_i F(t_i phi_i)``: 1/n for
    regression data and 1 for observed entries, whose objective sums over the
    observed set. Dense predictors and covariates are stored centered; the
    intercept seen by the solver absorbs <mean X, B> + mean W^T c, and
    :meth:`scores` evaluates the uncentered classifier.

    Attributes:
        design: Trace evaluation for the (centered) predictors
        weights: |Y_i - pi|
        labels: sgn(Y_i - pi)
        covariates: Centered array (n, p)
        fit_intercept: Whether b is a free parameter
        level: Level pi
        normalizer: Factor in front of the summed margin loss
        predictor_mean: Mean predictor removed from the design, None for entry lookup
        covariate_mean: Mean covariate vector removed from ``covariates``
    """

    design: Union[MatrixDesign, EntryDesign]
    weights: np.ndarray
    labels: np.ndarray
    covariates: np.ndarray
    fit_intercept: bool = True
    level: float = 0.0
    normalizer: Optional[float] = None
    predictor_mean: Optional[np.ndarray] = None
    covariate_mean: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.normalizer is None:
            self.normalizer = 1.0 / self.n
        if self.covariate_mean is None:
            self.covariate_mean = np.zeros(self.p)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.design.shape

    @classmethod
    def from_dataset(cls, data: Dataset, level: float) -> "WeightedProblem":
        shifted = data.responses - level
        predictor_mean = data.predictors.mean(axis=0)
        covariate_mean = data.covariates.mean(axis=0)
        return cls(
            design=MatrixDesign(data.predictors - predictor_mean),
            weights=np.abs(shifted),
            labels=sgn(shifted),
            covariates=data.covariates - covariate_mean,
            fit_intercept=True,
            level=float(level),
            normalizer=1.0 / data.n,
            predictor_mean=predictor_mean,
            covariate_mean=covariate_mean,
        )

    @classmethod
    def from_observed(cls, obs: ObservedMatrix, level: float) -> "WeightedProblem":
        shifted = obs.values - level
        return cls(
            design=EntryDesign(obs.d1, obs.d2, obs.rows, obs.cols),
            weights=np.abs(shifted),
            labels=sgn(shifted),
            covariates=np.zeros((obs.n_obs, 0)),
            fit_intercept=False,
            level=float(level),
            normalizer=1.0,
        )

    def offset(self, B: np.ndarray, c: np.ndarray) -> float:
        """<mean X, B> + mean W^T c, the intercept shift between raw and centered scores."""
        value = 0.0
        if self.predictor_mean is not None:
            value += float(np.sum(self.predictor_mean * B))
        if self.p > 0:
            value += float(self.covariate_mean @ c)
        return value

    def centered_scores(self, B: np.ndarray, b0: float, c: np.ndarray) -> np.ndarray:
        phi = self.design.scores(B) + b0
        if self.p > 0:
            phi = phi + self.covariates @ c
        return phi

    def scores(self, B: np.ndarray, b: float, c: np.ndarray) -> np.ndarray:
        """phi_i = <X_i, B> + b + W_i^T c on the original predictors."""
        return self.centered_scores(B, b + self.offset(B, c), c)

    def margin_risk(self, phi: np.ndarray, kind: LossKind) -> float:
        margins = self.labels * phi
        values = hinge(margins) if kind is LossKind.HINGE else psi(margins)
        return float(self.normalizer * np.sum(self.weights * values))


def as_problem(data: Union[Dataset, ObservedMatrix, WeightedProblem], level: float) -> WeightedProblem:
    """Wrap a dataset or an observed matrix as the weighted problem at a level."""
    if isinstance(data, WeightedProblem):
        return data
    if isinstance(data, Dataset):
        return WeightedProblem.from_dataset(data, level)
    if isinstance(data, ObservedMatrix):
        return WeightedProblem.from_observed(data, level)
    raise ValidationException(f"cannot build a classification problem from {type(data).__name__}")


@dataclass
class AdmmState:
    """Iterates of one ADMM run; ``b`` is the intercept of the centered design."""

    B: np.ndarray
    b: float
    c: np.ndarray
    S: np.ndarray
    multiplier: np.ndarray
    rho: float
    iteration: int = 0
    objective_trace: List[float] = field(default_factory=list)


def _margin_kind(kind) -> LossKind:
    try:
        kind = LossKind(kind)
    except ValueError:
        raise ValidationException(f"unknown loss {kind!r}")
    if kind is LossKind.ZERO_ONE:
        raise ValidationException("the zero-one loss cannot be optimized directly; choose hinge or psi")
    return kind


def _check_finite(level: float, *arrays) -> None:
    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise SolverDivergenceException("primal solver produced non-finite iterates", level=level)


def _convex_step(
    problem: WeightedProblem,
    kappa: float,
    linear: np.ndarray,
    center: np.ndarray,
    mu: float,
    start: Point,
    max_iters: int,
    patience: int,
) -> Point:
    """
    Proximal subgradient descent on
    normalizer * sum w_i [kappa (1 - z_i)_+ + linear_i z_i] + mu ||B - center||_F^2, z_i = t_i phi_i,
    in centered coordinates.

    Stops after ``patience`` steps without a relative improvement of
    ``INNER_RTOL`` and returns the best iterate seen, the starting point included.
    """
    B, b, c = start[0].copy(), float(start[1]), start[2].copy()
    weighted = problem.normalizer * problem.weights

    def objective(phi, B):
        z = problem.labels * phi
        loss = np.sum(weighted * (kappa * hinge(z) + linear * z))
        return float(loss + mu * np.sum((B - center) ** 2))

    phi = problem.centered_scores(B, b, c)
    best_value, best = objective(phi, B), (B.copy(), b, c.copy())
    stall = 0
    for t in range(1, max_iters + 1):
        z = problem.labels * phi
        g_phi = weighted * problem.labels * (linear - kappa * (z < 1.0))
        eta = 1.0 / np.sqrt(t)
        B = (B - eta * problem.design.adjoint(g_phi) + 2.0 * eta * mu * center) / (1.0 + 2.0 * eta * mu)
        if problem.fit_intercept:
            b = b - eta * float(np.sum(g_phi))
        if problem.p > 0:
            c = c - eta * (problem.covariates.T @ g_phi)
        _check_finite(problem.level, B, c, [b])
        phi = problem.centered_scores(B, b, c)
        value = objective(phi, B)
        if value < best_value - constants.INNER_RTOL * abs(best_value):
            stall = 0
        else:
            stall += 1
        if value < best_value:
            best_value, best = value, (B.copy(), b, c.copy())
        if stall >= patience:
            break
    return best


def _entrywise_step(
    problem: WeightedProblem,
    kappa: float,
    linear: np.ndarray,
    center: np.ndarray,
    mu: float,
) -> Point:
    """
    Exact minimizer of the convex step when every predictor is a basis matrix.

    The objective separates over entries. Entry (i, j) minimizes
    A+ (1 - z)_+ + A- (1 + z)_+ + L z + mu (z - c)^2 where A+/A- sum the
    weights of its positive/negative observations and L collects the linear
    terms; the minimizer sits in the region [-1, 1], above it or below it.
    """
    d1, d2 = problem.shape
    design = problem.design
    weighted = problem.normalizer * problem.weights
    positive = problem.labels > 0
    size = d1 * d2

    def accumulate(values, mask=None):
        flat = design.flat_index if mask is None else design.flat_index[mask]
        values = values if mask is None else values[mask]
        return np.bincount(flat, weights=values, minlength=size).reshape(d1, d2)

    a_plus = kappa * accumulate(weighted, positive)
    a_minus = kappa * accumulate(weighted, ~positive)
    shifted = center - accumulate(weighted * linear * problem.labels) / (2.0 * mu)

    z = shifted + (a_plus - a_minus) / (2.0 * mu)
    above = z > 1.0
    below = z < -1.0
    z[above] = np.maximum(1.0, shifted[above] - a_minus[above] / (2.0 * mu))
    z[below] = np.minimum(-1.0, shifted[below] + a_plus[below] / (2.0 * mu))
    _check_finite(problem.level, z)
    return z, 0.0, np.zeros(problem.p)


def _primal_step(
    problem: WeightedProblem,
    S: np.ndarray,
    multiplier: np.ndarray,
    rho: float,
    lam: float,
    kind: LossKind,
    warm: Optional[Point],
    max_inner_iters: int,
    cccp_rounds: int,
    patience: int,
) -> Point:
    # Centered coordinates throughout.
    mu = lam + rho
    center = (2.0 * rho * S - multiplier) / (2.0 * mu)
    zeros_c = np.zeros(problem.p)
    if not np.any(problem.weights > 0):
        return center, problem.offset(center, zeros_c), zeros_c

    def convex(kappa, linear, point):
        if isinstance(problem.design, EntryDesign) and problem.p == 0:
            return _entrywise_step(problem, kappa, linear, center, mu)
        return _convex_step(problem, kappa, linear, center, mu, point, max_inner_iters, patience)

    no_linear = np.zeros(problem.n)
    point = (np.zeros(problem.shape), 0.0, zeros_c) if warm is None else warm
    if kind is LossKind.HINGE:
        return convex(1.0, no_linear, point)

    if warm is None:
        point = convex(1.0, no_linear, point)
    for _ in range(cccp_rounds):
        z = problem.labels * problem.centered_scores(*point)
        linear = 2.0 * (z < 0.0)
        point = convex(2.0, linear, point)
    return point


def primal_update(
    data: Union[Dataset, ObservedMatrix, WeightedProblem],
    level: float,
    S: np.ndarray,
    multiplier: np.ndarray,
    rho: float,
    lam: float,
    kind: Union[LossKind, str],
    warm: Optional[Point] = None,
    max_inner_iters: int = constants.DEFAULT_MAX_INNER_ITERS,
    cccp_rounds: int = constants.DEFAULT_CCCP_ROUNDS,
    patience: int = constants.DEFAULT_INNER_PATIENCE,
) -> Point:
    """
    Minimize the margin risk plus (lam + rho) ||B - S_bar||_F^2 over (B, b, c).

    S_bar = (2 rho S - multiplier) / (2 (rho + lam)). The hinge objective is
    solved by proximal subgradient descent, or exactly entry by entry when the
    predictors are basis matrices. For psi, the decomposition
    psi(z) = 2 (1 - z)_+ - 2 (-z)_+ is used: the concave part is linearized at
    the current iterate and each round solves the resulting convex problem.

    Args:
        data: Dataset, observed matrix, or a prepared weighted problem
        level: Level pi
        S: Dual variable
        multiplier: Lagrange multiplier
        rho: Augmentation weight, > 0
        lam: Ridge weight, >= 0
        kind: hinge or psi
        warm: Starting point (B, b, c); zeros when omitted
        max_inner_iters: Subgradient step cap per convex solve
        cccp_rounds: Linearization rounds for psi
        patience: Steps without progress before a convex solve stops

    Returns:
        Tuple (B, b, c)

    Raises:
        SolverDivergenceException: When iterates become non-finite
    """
    kind = _margin_kind(kind)
    if not rho > 0:
        raise ValidationException(f"rho must be positive, got {rho}")
    problem = as_problem(data, level)
    if warm is not None:
        B0 = np.asarray(warm[0], dtype=np.float64)
        c0 = np.asarray(warm[2], dtype=np.float64).reshape(-1)
        warm = (B0, float(warm[1]) + problem.offset(B0, c0), c0)
    B, b0, c = _primal_step(
        problem, S, multiplier, rho, lam, kind, warm, max_inner_iters, cccp_rounds, patience
    )
    return B, b0 - problem.offset(B, c), c


def dual_update(
    B: np.ndarray,
    multiplier: np.ndarray,
    rho: float,
    budgets: Budgets,
    iters: int = constants.DEFAULT_PROJECTION_ITERS,
) -> np.ndarray:
    """
    Project (2 rho B + multiplier) / (2 rho) onto the rank/support constraint set.

    Args:
        B: Primal variable
        multiplier: Lagrange multiplier
        rho: Augmentation weight, > 0
        budgets: (r, s1, s2)

    Returns:
        Feasible dual variable S
    """
    if not rho > 0:
        raise ValidationException(f"rho must be positive, got {rho}")
    r, s1, s2 = budgets
    return project_sparse_lowrank((2.0 * rho * B + multiplier) / (2.0 * rho), r, s1, s2, iters)


def multiplier_update(multiplier: np.ndarray, B: np.ndarray, S: np.ndarray, rho: float) -> np.ndarray:
    """
    Return multiplier + 2 rho (B - S).
    """
    multiplier = np.asarray(multiplier, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if not (multiplier.shape == B.shape == S.shape):
        raise ValidationException(f"shape mismatch: {multiplier.shape}, {B.shape}, {S.shape}")
    return multiplier + 2.0 * rho * (B - S)


def _classifier_from_dual(
    problem: WeightedProblem,
    S: np.ndarray,
    b0: float,
    c: np.ndarray,
    budgets: Budgets,
) -> TraceFunction:
    """
    Build the classifier (S, b, c) inside the bounded-intercept region.

    When |b| > ||S||_F + 1 the whole triple is scaled by 1 / (|b| - ||S||_F),
    which puts b on the boundary and leaves every sign of phi unchanged.
    """
    r, s1, s2 = budgets
    u, v = factorize(S, r)
    b = b0 - problem.offset(S, c) if problem.fit_intercept else 0.0
    norm = float(np.linalg.norm(u @ v.T))
    if abs(b) > norm + 1.0:
        alpha = 1.0 / (abs(b) - norm)
        root = np.sqrt(alpha)
        u, v, b, c = u * root, v * root, b * alpha, c * alpha
        bound = float(np.linalg.norm(u @ v.T)) + 1.0
        b = float(np.clip(b, -bound, bound))
    return TraceFunction(
        u=u,
        v=v,
        intercept=b,
        covariate_coeffs=c,
        rank_budget=r,
        support_budget=(s1, s2),
        level=problem.level,
    )


def _dual_objective(problem: WeightedProblem, state: AdmmState, kind: LossKind, lam: float) -> float:
    phi = problem.centered_scores(state.S, state.b, state.c)
    return problem.margin_risk(phi, kind) + lam * float(np.sum(state.S ** 2))


def _initial_dual(problem: WeightedProblem, budgets: Budgets, seed: int, start: int) -> np.ndarray:
    if start == 0:
        return np.zeros(problem.shape)
    r, s1, s2 = budgets
    init = make_rng(seed, start).standard_normal(problem.shape)
    init /= max(float(np.linalg.norm(init)), np.finfo(np.float64).tiny)
    return project_sparse_lowrank(init, r, s1, s2)


def _run_start(
    problem: WeightedProblem,
    hp: Hyperparams,
    kind: LossKind,
    budgets: Budgets,
    seed: int,
    start: int,
    sink: Optional[Sink],
) -> Tuple[TraceFunction, float, AdmmState, float, bool]:
    S = _initial_dual(problem, budgets, seed, start)
    state = AdmmState(
        B=np.zeros(problem.shape), b=0.0, c=np.zeros(problem.p), S=S, multiplier=np.zeros(problem.shape), rho=hp.rho0
    )

    residual, converged = np.inf, False
    for k in range(hp.max_admm_iters):
        state.B, state.b, state.c = _primal_step(
            problem, state.S, state.multiplier, state.rho, hp.lam, kind, (state.B, state.b, state.c),
            hp.max_inner_iters, constants.DEFAULT_CCCP_ROUNDS, constants.DEFAULT_INNER_PATIENCE,
        )
        previous = state.S
        state.S = dual_update(state.B, state.multiplier, state.rho, budgets)
        state.multiplier = multiplier_update(state.multiplier, state.B, state.S, state.rho)
        state.iteration = k + 1

        scale = max(1.0, float(np.linalg.norm(state.S)))
        residual = float(np.linalg.norm(state.B - state.S)) / scale
        dual_change = float(np.linalg.norm(state.S - previous)) / scale
        objective = _dual_objective(problem, state, kind, hp.lam)
        state.objective_trace.append(objective)
        record = AdmmRecord(problem.level, start, state.iteration, objective, residual, state.rho)
        logger.debug(f"level {problem.level:+.4f} start {start} iter {state.iteration}: "
                     f"objective={objective:.6g} residual={residual:.3g} rho={state.rho:.4g}")
        if sink is not None:
            sink(record)
        state.rho *= hp.rho_growth
        if residual < hp.primal_tol and dual_change < hp.primal_tol:
            converged = True
            break

    tf = _classifier_from_dual(problem, state.S, state.b, state.c, budgets)
    return tf, _dual_objective(problem, state, kind, hp.lam), state, residual, converged


def solve_level(
    data: Union[Dataset, ObservedMatrix, WeightedProblem],
    level: float,
    hp: Hyperparams,
    budgets: Optional[Budgets] = None,
    seed: Optional[int] = None,
    sink: Optional[Sink] = None,
) -> Tuple[TraceFunction, LevelReport]:
    """
    Fit the classifier at one level from ``hp.n_starts`` dual initializations.

    Start 0 begins from S = 0, so its first primal step is driven by the loss
    alone; the other starts draw S at random.

    Each start iterates primal, dual and multiplier updates with
    rho <- rho_growth * rho until both the relative primal residual
    ||B - S|| / max(1, ||S||) and the relative dual change fall below
    ``hp.primal_tol``, or ``hp.max_admm_iters`` is reached. The S-based
    classifier with the lowest penalized objective wins and is brought into
    the region |b| <= ||B||_F + 1 by a sign-preserving rescaling.

    Args:
        data: Dataset, observed matrix or weighted problem
        level: Level pi
        hp: Hyperparameters; unset H/lambda are resolved from the sample size
        budgets: (r, s1, s2); taken from hp when omitted
        seed: Seed of the start streams; hash64(hp.seed, level) when omitted
        sink: Callable receiving one AdmmRecord per iteration

    Returns:
        Tuple of (classifier, report)

    Raises:
        InfeasibleBudgetException: When the budgets do not fit
        SolverDivergenceException: When every start diverges
    """
    kind = _margin_kind(hp.loss)
    problem = as_problem(data, level)
    hp = hp.resolve(problem.n)
    budgets = (hp.r, hp.s1, hp.s2) if budgets is None else tuple(int(x) for x in budgets)
    check_budgets(*budgets, *problem.shape)
    if seed is None:
        seed = hash64(hp.seed, float(level))

    best = None
    diverged = 0
    last_error = None
    for start in range(hp.n_starts):
        try:
            tf, objective, state, residual, converged = _run_start(problem, hp, kind, budgets, seed, start, sink)
        except SolverDivergenceException as e:
            diverged += 1
            last_error = e
            logger.warning(f"level {level:+.4f} start {start} diverged: {e.error_message}")
            continue
        if best is None or objective < best[1]:
            best = (tf, objective, state, residual, converged, start)

    if best is None:
        raise SolverDivergenceException(
            f"all {hp.n_starts} starts diverged; last error: {last_error.error_message}", level=level
        )
    tf, objective, state, residual, converged, start = best
    if not converged:
        logger.warning(
            f"level {level:+.4f}: selected start {start} hit the iteration cap "
            f"({state.iteration} iterations, residual {residual:.3g})"
        )
    report = LevelReport(
        level=float(level),
        start=start,
        iterations=state.iteration,
        converged=converged,
        primal_residual=residual,
        objective=objective,
        diverged_starts=diverged,
    )
    logger.info(f"level {level:+.4f}: objective={objective:.6g} iterations={state.iteration} converged={converged}")
    return tf, report


def fit_sign_classifier(
    data: Dataset,
    level: float,
    hp: Hyperparams,
    seed: Optional[int] = None,
    sink: Optional[Sink] = None,
) -> TraceFunction:
    """
    Fit the rank/support-constrained sign classifier at one level.

    Args:
        data: Dataset with rescaled responses
        level: Level pi
        hp: Hyperparameters
        seed: Seed of the start streams; derived from (hp.seed, level) when omitted
        sink: Callable receiving one AdmmRecord per iteration

    Returns:
        Feasible TraceFunction

    Raises:
        InfeasibleBudgetException: When the budgets do not fit the data
        SolverDivergenceException: When every start diverges
    """
    hp.check_dims(data.d1, data.d2)
    tf, _ = solve_level(data, level, hp, seed=seed, sink=sink)
    return tf
