"""
Synthetic data generators, fixture matrices, evaluation metrics and exact oracles.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.special import expit
from scipy.stats import norm

from .constants import ActivationPattern, LinkKind, ResponseKind
from .entities import Dataset, ObservedMatrix, SignSeriesModel
from .estimator import predict_many
from .exceptions import InfeasibleBudgetException, ValidationException
from .projection import truncated_svd
from .utils.helpers import as_dense_matrix, make_rng, sgn

logger = logging.getLogger("assist.simgen")

# Monte Carlo draws used to calibrate the distribution of <X, B>.
CALIBRATION_DRAWS = 100_000

# Connection-strength functions g(u) for latent network edges, u in [0, 1].
G_LIBRARY: List[Callable[[np.ndarray], np.ndarray]] = [
    lambda u: u,
    lambda u: u ** 2,
    np.sqrt,
    np.log1p,
    lambda u: np.sin(u * np.pi / 2.0),
]


def smooth_link(z):
    """h(z) = (exp(z) - 1) / (exp(z) + 1)."""
    return np.tanh(np.asarray(z, dtype=np.float64) / 2.0)


def step_link(z):
    """h(z) = -0.6 + 1.2 * 1(z > 0)."""
    return -0.6 + 1.2 * (np.asarray(z, dtype=np.float64) > 0)


@dataclass(frozen=True, eq=False)
class RegressionTruth:
    """
    True regression function of the trace-regression simulator.

    f(X) = h(z) with z = (G^-1 o G_bar)(<X, B>), where G_bar is the empirical
    CDF of <X, B> from a calibration sample and G is the standard normal CDF
    (smooth link) or the Uniform[-1, 1] CDF (step link).
    """

    coefficients: np.ndarray
    calibration: np.ndarray
    link: LinkKind
    response: ResponseKind

    @property
    def d(self) -> int:
        return self.coefficients.shape[0]

    def empirical_cdf(self, t) -> np.ndarray:
        m = self.calibration.size
        heights = (np.arange(1, m + 1) - 0.5) / m
        return np.interp(t, self.calibration, heights)

    def latent(self, predictors) -> np.ndarray:
        """z(X) for a stack of predictors."""
        stack = np.asarray(predictors, dtype=np.float64).reshape(-1, self.d, self.d)
        u = self.empirical_cdf(np.einsum("mij,ij->m", stack, self.coefficients))
        if self.link is LinkKind.SMOOTH:
            return norm.ppf(u)
        return 2.0 * u - 1.0

    def signal(self, predictors) -> np.ndarray:
        """f(X) in [-1, 1]."""
        z = self.latent(predictors)
        return smooth_link(z) if self.link is LinkKind.SMOOTH else step_link(z)

    def mean_response(self, predictors) -> np.ndarray:
        """E[Y | X] on the raw response scale."""
        f = self.signal(predictors)
        return f if self.response is ResponseKind.CONTINUOUS else (f + 1.0) / 2.0

    def sample_predictors(self, rng: np.random.Generator, m: int) -> np.ndarray:
        return rng.uniform(0.0, 1.0, size=(m, self.d, self.d))


def gen_low_rank(d: int, r: int, seed: Optional[int] = 0, s: Optional[int] = None) -> np.ndarray:
    """
    Seeded rank-r matrix supported on an s x s block, unit Frobenius norm.

    Args:
        d: Dimension
        r: Rank
        seed: Seed
        s: Support size (d when omitted)

    Returns:
        Matrix (d, d)
    """
    s = d if s is None else s
    if not 1 <= r <= s <= d:
        raise InfeasibleBudgetException(r, s, s, d, d)
    rng = make_rng(seed, 0)
    rows = np.sort(rng.choice(d, size=s, replace=False))
    cols = np.sort(rng.choice(d, size=s, replace=False))
    block = rng.standard_normal((s, r)) @ rng.standard_normal((r, s))
    B = np.zeros((d, d))
    B[np.ix_(rows, cols)] = block
    return B / np.linalg.norm(B)


def gen_regression(
    d: int,
    r: int,
    s: int,
    n: int,
    response: Union[ResponseKind, str] = ResponseKind.CONTINUOUS,
    link: Union[LinkKind, str] = LinkKind.SMOOTH,
    noise_sd: float = 0.1,
    seed: Optional[int] = 0,
) -> Tuple[Dataset, RegressionTruth]:
    """
    Draw a trace-regression dataset with a rank-r, s x s supported coefficient matrix.

    Predictor entries are iid Uniform[0, 1]. Continuous responses are
    f(X) + Normal(0, noise_sd^2); binary responses are Bernoulli((f(X) + 1) / 2)
    coded as 0/1.

    Args:
        d: Matrix dimension
        r: Rank of B
        s: Row and column support of B
        n: Number of samples
        response: continuous or binary
        link: smooth or step
        noise_sd: Noise standard deviation for continuous responses
        seed: Seed

    Returns:
        Tuple of (dataset, truth)
    """
    response = ResponseKind(response)
    link = LinkKind(link)
    if n < 1:
        raise ValidationException(f"sample size must be positive, got {n}")
    if noise_sd < 0:
        raise ValidationException(f"noise_sd must be nonnegative, got {noise_sd}")
    B = gen_low_rank(d, r, seed, s)

    # Only the support block of X enters <X, B>.
    rows, cols = np.flatnonzero(B.any(axis=1)), np.flatnonzero(B.any(axis=0))
    block = B[np.ix_(rows, cols)]
    calibration_rng = make_rng(seed, 1)
    draws = calibration_rng.uniform(0.0, 1.0, size=(CALIBRATION_DRAWS, rows.size, cols.size))
    calibration = np.sort(np.einsum("mij,ij->m", draws, block))
    truth = RegressionTruth(B, calibration, link, response)

    data_rng = make_rng(seed, 2)
    predictors = truth.sample_predictors(data_rng, n)
    f = truth.signal(predictors)
    if response is ResponseKind.CONTINUOUS:
        responses = f + noise_sd * data_rng.standard_normal(n)
    else:
        responses = (data_rng.uniform(size=n) < (f + 1.0) / 2.0).astype(np.float64)
    logger.debug(f"generated regression data d={d} r={r} s={s} n={n} link={link.value}")
    return Dataset.from_arrays(predictors, responses), truth


def network_regions(d: int, pattern: Union[ActivationPattern, str]) -> List[np.ndarray]:
    """
    Boolean (d, d) masks of the subregions of an activation pattern.

    The pattern lives on a centered active block of side max(8, 2d/3).
    Cross and block are exact rectangles; star and circle are rasterized
    approximations.

    Args:
        d: Network size, >= 8
        pattern: cross, block, star or circle

    Returns:
        Disjoint masks, one per subregion
    """
    try:
        pattern = ActivationPattern(pattern)
    except ValueError:
        raise ValidationException(f"unknown activation pattern {pattern!r}")
    if d < 8:
        raise ValidationException(f"network size must be at least 8, got {d}")
    m = min(d, max(8, 2 * d // 3))
    lo = (d - m) // 2
    hi = lo + m
    c = lo + m // 2

    def rect(r0, r1, c0, c1):
        mask = np.zeros((d, d), dtype=bool)
        mask[r0:r1, c0:c1] = True
        return mask

    if pattern is ActivationPattern.CROSS:
        return [
            rect(c - 2, c + 2, lo, c - 2),
            rect(c - 2, c + 2, c - 2, c + 2),
            rect(c - 2, c + 2, c + 2, hi),
            rect(lo, c - 2, c - 2, c + 2),
            rect(c + 2, hi, c - 2, c + 2),
        ]
    if pattern is ActivationPattern.BLOCK:
        return [rect(lo, c, lo, c), rect(lo, c, c, hi), rect(c, hi, lo, c), rect(c, hi, c, hi)]

    i, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    inside = (i >= lo) & (i < hi) & (j >= lo) & (j < hi)
    di, dj = i - c, j - c
    if pattern is ActivationPattern.STAR:
        arms = [di == 0, dj == 0, di == dj, di == -dj]
    else:
        ring = np.abs(np.hypot(di, dj) - m / 3.0) < 0.75
        arms = [ring & (di < 0), ring & (di >= 0)]
    regions, taken = [], np.zeros((d, d), dtype=bool)
    for arm in arms:
        mask = arm & inside & ~taken
        taken |= mask
        regions.append(mask)
    return regions


def gen_network_latent(
    d: int,
    pattern: Union[ActivationPattern, str],
    sigma: float,
    n: int,
    seed: Optional[int] = 0,
    g_library_seed: Optional[int] = 0,
) -> Dataset:
    """
    Draw latent-strength network data with binary responses.

    For each sample, u ~ Uniform[0, 1], Y ~ Bernoulli(u) and
    X_ij ~ Normal(g_ij(u) 1(edge active), sigma^2), where every subregion of the
    pattern draws its g from the built-in library.

    Args:
        d: Network size, >= 8
        pattern: cross, block, star or circle
        sigma: Noise standard deviation
        n: Number of samples
        seed: Seed of the samples
        g_library_seed: Seed of the per-region g choice

    Returns:
        Dataset with 0/1 responses
    """
    regions = network_regions(d, pattern)
    if sigma < 0 or n < 1:
        raise ValidationException(f"need sigma >= 0 and n >= 1, got ({sigma}, {n})")
    choices = make_rng(g_library_seed).integers(len(G_LIBRARY), size=len(regions))
    rng = make_rng(seed)
    strength = rng.uniform(0.0, 1.0, size=n)
    labels = (rng.uniform(size=n) < strength).astype(np.float64)
    predictors = np.zeros((n, d, d))
    for mask, choice in zip(regions, choices):
        predictors[:, mask] = G_LIBRARY[choice](strength)[:, np.newaxis]
    if sigma > 0:
        predictors += sigma * rng.standard_normal((n, d, d))
    return Dataset.from_arrays(predictors, labels)


def gen_max_graphon(d: int) -> np.ndarray:
    """Theta(i, j) = log(1 + max(i, j) / d) with 1-based i, j."""
    index = np.arange(1, d + 1)
    return np.log1p(np.maximum.outer(index, index) / d)


def gen_banded(d: int) -> np.ndarray:
    """M(i, j) = |i - j|."""
    index = np.arange(d, dtype=np.float64)
    return np.abs(np.subtract.outer(index, index))


def gen_identity(d: int) -> np.ndarray:
    return np.eye(d)


def gen_sbm(d: int, blocks: int, means, seed: Optional[int] = 0) -> np.ndarray:
    """
    Stochastic-block mean matrix with random community labels.

    Args:
        d: Dimension
        blocks: Number of communities
        means: Matrix (blocks, blocks) of block means
        seed: Seed of the labels

    Returns:
        Matrix (d, d) with Theta(i, j) = means[z_i, z_j]
    """
    means = as_dense_matrix(means, "means")
    if blocks < 1 or means.shape != (blocks, blocks):
        raise ValidationException(f"means must have shape ({blocks}, {blocks}), got {means.shape}")
    labels = make_rng(seed).integers(blocks, size=d)
    return means[np.ix_(labels, labels)]


def gen_monotone_transform(m, c: float) -> np.ndarray:
    """Entrywise logistic transform (1 + exp(-c m))^-1, c > 0."""
    if not c > 0:
        raise ValidationException(f"transform slope must be positive, got {c}")
    return expit(c * np.asarray(m, dtype=np.float64))


def numerical_rank(m, rel_tol: float = 0.01) -> int:
    """
    Smallest r whose rank-r truncation lies within rel_tol * ||m||_F of m.

    Args:
        m: Dense matrix
        rel_tol: Relative Frobenius tolerance, > 0

    Returns:
        Nonnegative integer
    """
    if not rel_tol > 0:
        raise ValidationException(f"rel_tol must be positive, got {rel_tol}")
    s = linalg.svdvals(as_dense_matrix(m))
    total = float(np.sqrt(np.sum(s ** 2)))
    if total == 0:
        return 0
    # tails[k] is the residual of the rank-k truncation.
    tails = np.sqrt(np.maximum(np.cumsum((s ** 2)[::-1])[::-1], 0.0))
    tails = np.append(tails, 0.0)
    return int(np.flatnonzero(tails <= rel_tol * total)[0])


Estimate = Union[SignSeriesModel, Callable[[np.ndarray], np.ndarray]]


def _evaluate(estimate: Estimate, predictors: np.ndarray) -> np.ndarray:
    if isinstance(estimate, SignSeriesModel):
        return predict_many(estimate, predictors)
    return np.asarray(estimate(predictors), dtype=np.float64)


def l1_error(
    estimate: Estimate,
    truth: Union[RegressionTruth, Callable[[np.ndarray], np.ndarray]],
    m_draws: int = 10_000,
    seed: Optional[int] = 0,
    sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None,
) -> float:
    """
    Monte Carlo estimate of E|f_hat(X) - f(X)| over fresh predictor draws.

    Args:
        estimate: Fitted model or callable on predictor stacks
        truth: Regression truth or callable giving the true mean response
        m_draws: Number of draws
        seed: Seed of the draws
        sampler: Predictor sampler (rng, m) -> stack; the truth's sampler by default

    Returns:
        Mean absolute error on the raw response scale
    """
    if m_draws < 1:
        raise ValidationException(f"m_draws must be positive, got {m_draws}")
    if sampler is None:
        if not isinstance(truth, RegressionTruth):
            raise ValidationException("a sampler is required when truth is a plain callable")
        sampler = truth.sample_predictors
    predictors = sampler(make_rng(seed), int(m_draws))
    expected = truth.mean_response(predictors) if isinstance(truth, RegressionTruth) else truth(predictors)
    return float(np.mean(np.abs(_evaluate(estimate, predictors) - expected)))


def best_constant_l1(truth: RegressionTruth, m_draws: int = 10_000, seed: Optional[int] = 0) -> float:
    """L1 error of the best constant predictor (the median of the mean response)."""
    predictors = truth.sample_predictors(make_rng(seed), int(m_draws))
    expected = truth.mean_response(predictors)
    return float(np.mean(np.abs(expected - np.median(expected))))


def misclassification_at_half(estimate: Estimate, data: Dataset) -> float:
    """
    Fraction of samples whose predicted side of the response midpoint disagrees with the label.

    Args:
        estimate: Fitted model or callable returning raw predictions
        data: Labeled test set

    Returns:
        Error rate in [0, 1]
    """
    covariates = data.covariates if data.p > 0 else None
    if isinstance(estimate, SignSeriesModel):
        predicted = predict_many(estimate, data.predictors, covariates)
    else:
        predicted = _evaluate(estimate, data.predictors)
    return float(np.mean((data.scale.forward(predicted) > 0) != (data.responses > 0)))


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """
    Finite predictor space with point masses and discrete conditional response laws.

    Attributes:
        masses: P(X = x_k), sums to one
        values: Per point, response support values in [-1, 1]
        probabilities: Per point, P(Y = value | X = x_k)
    """

    masses: np.ndarray
    values: Tuple[np.ndarray, ...]
    probabilities: Tuple[np.ndarray, ...]

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=np.float64)
        if masses.ndim != 1 or masses.size == 0 or np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-9:
            raise ValidationException("masses must be a nonnegative vector summing to one")
        if len(self.values) != masses.size or len(self.probabilities) != masses.size:
            raise ValidationException("one conditional law is needed per point")
        values = tuple(np.asarray(v, dtype=np.float64).reshape(-1) for v in self.values)
        probabilities = tuple(np.asarray(p, dtype=np.float64).reshape(-1) for p in self.probabilities)
        for v, p in zip(values, probabilities):
            if v.shape != p.shape or v.size == 0:
                raise ValidationException("conditional law values and probabilities must align")
            if np.any(np.abs(v) > 1) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
                raise ValidationException("conditional laws need values in [-1, 1] and probabilities summing to one")
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probabilities", probabilities)

    @property
    def size(self) -> int:
        return self.masses.size

    @property
    def conditional_means(self) -> np.ndarray:
        return np.array([float(v @ p) for v, p in zip(self.values, self.probabilities)])

    @classmethod
    def random(cls, size: int, seed: Optional[int] = 0, support: int = 3) -> "FiniteSpace":
        """Random space with Dirichlet masses and laws on ``support`` uniform values."""
        rng = make_rng(seed)
        masses = rng.dirichlet(np.ones(size))
        values = tuple(rng.uniform(-1.0, 1.0, size=support) for _ in range(size))
        probabilities = tuple(rng.dirichlet(np.ones(support)) for _ in range(size))
        return cls(masses, values, probabilities)


def brute_force_level_risk(space: FiniteSpace, level: float, assignment: Sequence[int]) -> float:
    """
    Population weighted 0-1 risk (1/2) E |Y - pi| |sgn(Y - pi) - a(X)| of a sign assignment.

    Args:
        space: Finite predictor space
        level: Level pi
        assignment: One sign (+1 or -1) per point

    Returns:
        Exact risk
    """
    assignment = np.asarray(assignment, dtype=np.float64)
    if assignment.shape != (space.size,) or not np.all(np.abs(assignment) == 1):
        raise ValidationException(f"assignment must hold {space.size} signs in {{-1, +1}}")
    risk = 0.0
    for mass, v, p, a in zip(space.masses, space.values, space.probabilities, assignment):
        shifted = v - level
        risk += mass * float(np.sum(p * np.abs(shifted) * 0.5 * np.abs(sgn(shifted) - a)))
    return risk


def minimum_risk_assignments(space: FiniteSpace, level: float, tol: float = 1e-12) -> Tuple[float, List[Tuple[int, ...]]]:
    """
    Enumerate all sign assignments and return the minimum risk with its minimizers.

    Args:
        space: Finite predictor space (at most 16 points)
        level: Level pi
        tol: Risks within tol of the minimum count as minimizers

    Returns:
        Tuple of (minimum risk, minimizing assignments)
    """
    if space.size > 16:
        raise ValidationException(f"exhaustive enumeration is limited to 16 points, got {space.size}")
    risks = {
        assignment: brute_force_level_risk(space, level, assignment)
        for assignment in itertools.product((-1, 1), repeat=space.size)
    }
    best = min(risks.values())
    return best, [a for a, risk in risks.items() if risk <= best + tol]


def _check_rank(obs: ObservedMatrix, r: int) -> None:
    if isinstance(r, bool) or int(r) != r or not 1 <= r <= min(obs.d1, obs.d2):
        raise ValidationException(f"rank {r} out of range for a {obs.d1}x{obs.d2} matrix")


def svd_impute_baseline(obs: ObservedMatrix, r: int, iters: int = 500, tol: float = 1e-12) -> np.ndarray:
    """
    Hard impute: mean-fill missing entries, then iterate rank-r truncation with observed-entry reset.

    Args:
        obs: Observed entries (raw values are used)
        r: Rank
        iters: Iteration cap
        tol: Relative change that stops the iteration

    Returns:
        Final rank-r truncation (d1, d2) on the raw scale
    """
    _check_rank(obs, r)
    observed = obs.cell_means()
    mask = ~np.isnan(observed)
    filled = np.where(mask, observed, np.nanmean(observed))
    low_rank = filled
    for _ in range(iters):
        u, s, v = truncated_svd(filled, r)
        low_rank = (u * s) @ v.T
        updated = np.where(mask, observed, low_rank)
        change = np.linalg.norm(updated - filled) / max(np.linalg.norm(filled), np.finfo(np.float64).tiny)
        filled = updated
        if change < tol:
            break
    u, s, v = truncated_svd(filled, r)
    return (u * s) @ v.T


def soft_impute_baseline(
    obs: ObservedMatrix,
    shrinkage: Optional[float] = None,
    iters: int = 500,
    tol: float = 1e-8,
) -> np.ndarray:
    """
    Soft impute: iterate singular-value soft thresholding with observed-entry reset.

    Args:
        obs: Observed entries (raw values are used)
        shrinkage: Threshold on singular values; 5% of the top singular value of
            the zero-filled observations when omitted
        iters: Iteration cap
        tol: Relative change that stops the iteration

    Returns:
        Imputed matrix (d1, d2) on the raw scale
    """
    observed = obs.cell_means()
    mask = ~np.isnan(observed)
    zero_filled = np.where(mask, observed, 0.0)
    if shrinkage is None:
        shrinkage = 0.05 * float(linalg.svdvals(zero_filled)[0])
    if shrinkage < 0:
        raise ValidationException(f"shrinkage must be nonnegative, got {shrinkage}")
    estimate = np.zeros(obs.shape)
    for _ in range(iters):
        u, s, vt = linalg.svd(np.where(mask, observed, estimate), full_matrices=False)
        updated = (u * np.maximum(s - shrinkage, 0.0)) @ vt
        change = np.linalg.norm(updated - estimate) ** 2 / max(np.linalg.norm(estimate) ** 2, 1e-9)
        estimate = updated
        if change < tol:
            break
    return estimate


FIXTURES = ("max-graphon", "banded", "identity", "sbm", "low-rank")


def fixture_matrix(name: str, d: int, seed: Optional[int] = 0, r: int = 2) -> np.ndarray:
    """
    Named completion fixture of size d x d.

    Args:
        name: max-graphon, banded, identity, sbm or low-rank
        d: Dimension
        seed: Seed for the random fixtures
        r: Rank of the low-rank fixture, number of blocks of the sbm fixture

    Returns:
        Matrix (d, d)
    """
    if name == "max-graphon":
        return gen_max_graphon(d)
    if name == "banded":
        return gen_banded(d)
    if name == "identity":
        return gen_identity(d)
    if name == "sbm":
        means = make_rng(seed, 1).uniform(-1.0, 1.0, size=(r, r))
        return gen_sbm(d, r, (means + means.T) / 2.0, seed)
    if name == "low-rank":
        return gen_low_rank(d, r, seed)
    raise ValidationException(f"unknown fixture {name!r}; expected one of {', '.join(FIXTURES)}")


def observe_uniformly(matrix, missing_frac: float, seed: Optional[int] = 0) -> ObservedMatrix:
    """
    Observe each entry independently with probability 1 - missing_frac.

    At least one entry is always observed.

    Args:
        matrix: Dense matrix
        missing_frac: Fraction of missing entries in [0, 1)
        seed: Seed of the mask

    Returns:
        ObservedMatrix with a fitted response scale
    """
    matrix = as_dense_matrix(matrix)
    if not 0.0 <= missing_frac < 1.0:
        raise ValidationException(f"missing_frac must lie in [0, 1), got {missing_frac}")
    draws = make_rng(seed).uniform(size=matrix.shape)
    mask = draws >= missing_frac
    if not mask.any():
        mask[np.unravel_index(np.argmax(draws), matrix.shape)] = True
    return ObservedMatrix.from_matrix(matrix, mask)
