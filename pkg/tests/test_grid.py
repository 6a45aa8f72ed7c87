import pytest

from assist.entities import Hyperparams
from assist.exceptions import ValidationException
from assist.grid import GridBuilder


def budgets(grid):
    return [(hp.r, hp.s1, hp.s2) for hp in grid]


def test_grid_skips_rank_above_support():
    grid = GridBuilder().ranks(1, 2).supports(1, 2, 3).build()
    assert budgets(grid) == [(1, 1, 1), (1, 2, 2), (1, 3, 3), (2, 2, 2), (2, 3, 3)]


def test_grid_inherits_base_fields():
    base = Hyperparams(H=4, lam=0.05, n_starts=2, seed=9)
    grid = GridBuilder(base).ranks(1).supports(2).losses("hinge", "psi").build()
    assert [hp.loss.value for hp in grid] == ["hinge", "psi"]
    assert all(hp.H == 4 and hp.lam == 0.05 and hp.n_starts == 2 and hp.seed == 9 for hp in grid)


def test_support_range_includes_stop():
    grid = GridBuilder().support_range(5, 15, 5).build()
    assert [hp.s1 for hp in grid] == [5, 10, 15]


@pytest.mark.parametrize("start, stop, increment", [(0, 5, 1), (5, 4, 1), (1, 5, 0)])
def test_support_range_rejects_invalid(start, stop, increment):
    with pytest.raises(ValidationException):
        GridBuilder().support_range(start, stop, increment)


def test_rectangular_supports():
    grid = GridBuilder().row_supports(1, 2).col_supports(3).build()
    assert budgets(grid) == [(1, 1, 3), (1, 2, 3)]


def test_duplicates_are_dropped():
    grid = GridBuilder().ranks(1, 1).supports(2, 2).lambdas(0.1, 0.1).build()
    assert len(grid) == 1


def test_empty_grid_raises():
    with pytest.raises(ValidationException):
        GridBuilder().ranks(3).supports(1, 2).build()


def test_from_config():
    config = {"base": {"H": 3, "n_starts": 1}, "r": [1, 2], "s": 2, "lambda": [0.01, 0.1]}
    grid = GridBuilder.from_config(config).build()
    assert budgets(grid) == [(1, 2, 2), (1, 2, 2), (2, 2, 2), (2, 2, 2)]
    assert [hp.lam for hp in grid] == [0.01, 0.1, 0.01, 0.1]
    assert all(hp.H == 3 and hp.n_starts == 1 for hp in grid)


def test_from_config_range_and_unknown_keys():
    grid = GridBuilder.from_config({"s_range": [2, 6], "increment": 2}).build()
    assert [hp.s1 for hp in grid] == [2, 4, 6]
    with pytest.raises(ValidationException):
        GridBuilder.from_config({"ranks": [1]})
