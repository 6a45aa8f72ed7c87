"""
Best Frobenius approximation under a joint rank and two-way support budget.
"""

import itertools
import logging
from math import comb
from typing import Tuple

import numpy as np
from scipy import linalg

from .constants import DEFAULT_PROJECTION_ITERS
from .exceptions import ComputationException, InfeasibleBudgetException, ValidationException
from .utils.helpers import as_dense_matrix, nonzero_cols, nonzero_rows

logger = logging.getLogger("assist.projection")

# Support pairs enumerated exactly up to this many candidates.
EXHAUSTIVE_LIMIT = 2048

# Relative singular value below which a matrix counts as rank deficient.
_RANK_RTOL = 1e-12


def truncated_svd(m, r: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Rank-r truncated singular value decomposition.

    Each singular pair is oriented so that the largest-magnitude entry of u is
    positive. Pairs whose singular value is numerically zero come back as zero
    columns.

    Args:
        m: Dense matrix (d1, d2)
        r: Number of singular triplets, 1 <= r <= min(d1, d2)

    Returns:
        Tuple (u, s, v) with u (d1, r), s (r,) nonincreasing, v (d2, r)

    Raises:
        ValidationException: When r is out of range
    """
    m = as_dense_matrix(m, "matrix")
    if isinstance(r, bool) or int(r) != r or not 1 <= r <= min(m.shape):
        raise ValidationException(f"rank {r} out of range for a {m.shape[0]}x{m.shape[1]} matrix")
    r = int(r)
    try:
        u, s, vt = linalg.svd(m, full_matrices=False, check_finite=False)
    except linalg.LinAlgError as e:
        raise ComputationException(f"SVD of a {m.shape[0]}x{m.shape[1]} matrix failed: {e}")
    u = u[:, :r].copy()
    s = s[:r].copy()
    v = vt[:r].T.copy()
    for k in range(r):
        pivot = np.argmax(np.abs(u[:, k]))
        if u[pivot, k] < 0:
            u[:, k] = -u[:, k]
            v[:, k] = -v[:, k]
    tiny = s <= max(m.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    u[:, tiny] = 0.0
    v[:, tiny] = 0.0
    s[tiny] = 0.0
    return u, s, v


def _singular_values(block: np.ndarray) -> np.ndarray:
    try:
        return linalg.svdvals(block, check_finite=False)
    except linalg.LinAlgError as e:
        raise ComputationException(f"SVD of a {block.shape[0]}x{block.shape[1]} block failed: {e}")


def check_budgets(r: int, s1: int, s2: int, d1: int, d2: int) -> None:
    """
    Raise when 1 <= r <= min(s1, s2), s1 <= d1, s2 <= d2 fails.
    """
    if not (1 <= r <= min(s1, s2) and s1 <= d1 and s2 <= d2):
        raise InfeasibleBudgetException(r, s1, s2, d1, d2)


def _is_feasible(m: np.ndarray, r: int, s1: int, s2: int) -> bool:
    rows, cols = nonzero_rows(m), nonzero_cols(m)
    if rows.size > s1 or cols.size > s2:
        return False
    if rows.size == 0 or min(rows.size, cols.size) <= r:
        return True
    s = _singular_values(m[np.ix_(rows, cols)])
    return s[r] <= _RANK_RTOL * s[0]


def _top(scores: np.ndarray, k: int) -> np.ndarray:
    # Largest scores first, lowest index on ties.
    return np.sort(np.argsort(-scores, kind="stable")[:k])


def _captured(m: np.ndarray, rows: np.ndarray, cols: np.ndarray, r: int) -> float:
    s = _singular_values(m[np.ix_(rows, cols)])
    return float(np.sum(s[:r] ** 2))


def _exhaustive_support(m: np.ndarray, r: int, s1: int, s2: int) -> Tuple[np.ndarray, np.ndarray]:
    d1, d2 = m.shape
    best, best_support = -1.0, None
    for rows in itertools.combinations(range(d1), s1):
        for cols in itertools.combinations(range(d2), s2):
            rows_a, cols_a = np.array(rows), np.array(cols)
            captured = _captured(m, rows_a, cols_a, r)
            if captured > best:
                best, best_support = captured, (rows_a, cols_a)
    return best_support


def _alternate(m: np.ndarray, r: int, s1: int, s2: int, rows: np.ndarray, iters: int) -> Tuple[np.ndarray, np.ndarray]:
    cols = _top(np.linalg.norm(m[rows, :], axis=0), s2)
    best, best_support = _captured(m, rows, cols, r), (rows, cols)
    for _ in range(iters):
        _, _, v = truncated_svd(m[np.ix_(rows, cols)], r)
        new_rows = _top(np.linalg.norm(m[:, cols] @ v, axis=1), s1)
        u, _, _ = truncated_svd(m[np.ix_(new_rows, cols)], r)
        new_cols = _top(np.linalg.norm(m[new_rows, :].T @ u, axis=1), s2)
        captured = _captured(m, new_rows, new_cols, r)
        if captured > best:
            best, best_support = captured, (new_rows, new_cols)
        if np.array_equal(new_rows, rows) and np.array_equal(new_cols, cols):
            break
        rows, cols = new_rows, new_cols
    return best_support


def _swap_refine(m: np.ndarray, r: int, rows: np.ndarray, cols: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # Single-index exchanges until none captures more energy.
    best = _captured(m, rows, cols, r)
    improved = True
    while improved:
        improved = False
        for axis in (0, 1):
            support = rows if axis == 0 else cols
            outside = np.setdiff1d(np.arange(m.shape[axis]), support)
            for k, candidate in itertools.product(range(support.size), outside):
                trial = np.sort(np.append(np.delete(support, k), candidate))
                trial_rows, trial_cols = (trial, cols) if axis == 0 else (rows, trial)
                captured = _captured(m, trial_rows, trial_cols, r)
                if captured > best * (1.0 + 1e-12):
                    best, rows, cols, improved = captured, trial_rows, trial_cols, True
                    break
    return rows, cols


def _alternating_support(m: np.ndarray, r: int, s1: int, s2: int, iters: int) -> Tuple[np.ndarray, np.ndarray]:
    # Seeds: rows of largest norm, rows of largest rank-r energy, and the same search on m^T.
    u, s, _ = truncated_svd(m, r)
    seeds = [_top(np.linalg.norm(m, axis=1), s1), _top(np.linalg.norm(u * s, axis=1), s1)]
    candidates = [_alternate(m, r, s1, s2, rows, iters) for rows in seeds]
    cols_t, rows_t = _alternate(m.T, r, s2, s1, _top(np.linalg.norm(m, axis=0), s2), iters)
    candidates.append((rows_t, cols_t))
    rows, cols = max(candidates, key=lambda support: _captured(m, support[0], support[1], r))
    return _swap_refine(m, r, rows, cols)


def project_sparse_lowrank(m, r: int, s1: int, s2: int, iters: int = DEFAULT_PROJECTION_ITERS) -> np.ndarray:
    """
    Project a matrix onto {S : rank(S) <= r, at most s1 nonzero rows, at most s2 nonzero columns}.

    For a fixed row set R and column set C the best approximation is the
    rank-r truncation of m[R, C], at distance ||m||^2 - sum_{k<=r} sigma_k^2.
    Supports are enumerated exactly when there are few candidates; otherwise
    rows and columns are selected alternately from the current singular
    subspaces for ``iters`` rounds from several seeds, and the best support is
    refined by single row or column exchanges. A feasible input is returned
    unchanged.

    Args:
        m: Dense matrix (d1, d2)
        r: Rank budget
        s1: Row support budget
        s2: Column support budget
        iters: Rounds of alternating row/column selection

    Returns:
        Feasible matrix of shape (d1, d2)

    Raises:
        InfeasibleBudgetException: When the budgets do not fit the dimensions
    """
    m = as_dense_matrix(m, "matrix")
    d1, d2 = m.shape
    check_budgets(r, s1, s2, d1, d2)
    if int(iters) < 1:
        raise ValidationException(f"iters must be positive, got {iters}")
    if _is_feasible(m, r, s1, s2):
        return m.copy()

    if s1 == d1 and s2 == d2:
        rows, cols = np.arange(d1), np.arange(d2)
    elif comb(d1, s1) * comb(d2, s2) <= EXHAUSTIVE_LIMIT:
        rows, cols = _exhaustive_support(m, r, s1, s2)
    else:
        logger.debug(f"alternating support search on {d1}x{d2} with budgets ({r}, {s1}, {s2})")
        rows, cols = _alternating_support(m, r, s1, s2, int(iters))

    u, s, v = truncated_svd(m[np.ix_(rows, cols)], r)
    projected = np.zeros_like(m)
    projected[np.ix_(rows, cols)] = (u * s) @ v.T
    return projected


def factorize(matrix: np.ndarray, r: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Factor a matrix of rank <= r as u v^T with u (d1, r) and v (d2, r).

    The factorization is computed on the submatrix of nonzero rows and columns,
    so zero rows and columns of the input stay exactly zero in the factors.

    Args:
        matrix: Dense matrix
        r: Number of factor columns

    Returns:
        Tuple (u, v)
    """
    d1, d2 = matrix.shape
    u_full = np.zeros((d1, r))
    v_full = np.zeros((d2, r))
    rows, cols = nonzero_rows(matrix), nonzero_cols(matrix)
    if rows.size == 0:
        return u_full, v_full
    k = min(r, rows.size, cols.size)
    u, s, v = truncated_svd(matrix[np.ix_(rows, cols)], k)
    root = np.sqrt(s)
    u_full[rows, :k] = u * root
    v_full[cols, :k] = v * root
    return u_full, v_full
