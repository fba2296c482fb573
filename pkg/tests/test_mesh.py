import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavekin.errors import GridError
from wavekin.mesh import (
    Grid,
    IndexTables,
    build_uniform_grid,
    locate_cell,
    locate_index,
    pair_diff_set,
    pair_sum_set,
    theta_bar,
    theta_hat,
    theta_tilde,
)


def scan_cell(x, lo, hi):
    """O(I) reference: first cell with lo <= x < hi (last cell closed)."""
    n = lo.size
    for i in range(n):
        if lo[i] <= x < hi[i] or (i == n - 1 and lo[i] <= x <= hi[i]):
            return i + 1
    return None


def random_grid(rng, tie_tol=None):
    n = int(rng.integers(2, 40))
    widths = rng.uniform(0.05, 1.0, n)
    edges = np.concatenate([[rng.uniform(1e-9, 0.5)], widths]).cumsum()
    return Grid(edges, tie_tol=tie_tol)


# ------------------------------------------------------------------ construction

def test_uniform_grid_test_case_one():
    g = build_uniform_grid(1e-9, 10.0, 30)
    np.testing.assert_allclose(g.widths, (10.0 - 1e-9) / 30, rtol=1e-12)
    assert g.pivots[0] == pytest.approx(1 / 6, rel=1e-8)
    assert g.R == 10.0 and g.omega_min == 1e-9


def test_uniform_grid_test_case_three():
    g = build_uniform_grid(1e-9, 2.0, 20)
    np.testing.assert_allclose(g.widths, 0.1, rtol=1e-8)
    assert g.edges[-1] == 2.0
    np.testing.assert_allclose(g.pivots, 0.05 + 0.1 * np.arange(20), atol=2e-9)


def test_worked_grid(worked_grid):
    np.testing.assert_allclose(worked_grid.edges, [0, 0.5, 1, 1.5, 2], atol=2e-9)
    np.testing.assert_allclose(worked_grid.pivots, [0.25, 0.75, 1.25, 1.75], atol=2e-9)
    assert worked_grid.I == 4
    assert np.all(worked_grid.pivots == 0.5 * (worked_grid.edges[:-1] + worked_grid.edges[1:]))


@pytest.mark.parametrize("args", [(0.0, 1.0, 4), (1.0, 1.0, 4), (2.0, 1.0, 4), (1e-9, 1.0, 1),
                                  (1e-9, 1.0, 2.5), (1e-9, float("inf"), 4)])
def test_uniform_grid_errors(args):
    with pytest.raises(GridError):
        build_uniform_grid(*args)


@pytest.mark.parametrize("edges", [[0.0, 1.0, 2.0], [1.0, 1.0, 2.0], [1.0, 2.0], [0.1, 0.5, 0.3],
                                   [0.1, np.nan, 1.0]])
def test_grid_errors(edges):
    with pytest.raises(GridError):
        Grid(np.array(edges))


# ------------------------------------------------------------------ locate_cell

@pytest.mark.parametrize("x, expected", [(1.2, 3), (2.0, 4), (3.0, None), (0.0, None),
                                         (1e-9, 1), (1.0, 3), (0.5, 2)])
def test_locate_cell_worked_grid(worked_grid, x, expected):
    assert locate_cell(x, worked_grid) == expected


def test_binary_search_matches_scan_raw_edges(rng):
    # tie_tol = 0: membership is the literal inequality on the edges
    for _ in range(20):
        g = random_grid(rng, tie_tol=0.0)
        xs = np.concatenate([rng.uniform(g.edges[0] - 0.5, g.edges[-1] + 0.5, 1000), g.edges])
        for x in xs:
            assert locate_cell(x, g) == scan_cell(x, g.edges[:-1], g.edges[1:])


def test_binary_search_matches_scan_default_tolerance(rng):
    for _ in range(20):
        g = random_grid(rng)
        near = np.concatenate([g.edges - 0.5 * g.tie_tol, g.edges - 2 * g.tie_tol])
        xs = np.concatenate([rng.uniform(g.edges[0] - 0.5, g.edges[-1] + 0.5, 1000), near])
        got = locate_index(xs, g)
        for x, i in zip(xs, got):
            ref = scan_cell(x, g.cell_lo, g.cell_hi)
            assert (None if i < 0 else i + 1) == ref


def test_tie_goes_right(worked_grid):
    e = worked_grid.edges
    assert locate_cell(e[2], worked_grid) == 3
    assert locate_cell(e[2] - 1e-12, worked_grid) == 3
    assert locate_cell(e[2] - 1e-3, worked_grid) == 2


# ------------------------------------------------------------------ index sets

def test_pair_sets_worked_grid(worked_grid):
    g = worked_grid
    assert pair_sum_set(4, g) == {(1, 3), (3, 1), (2, 2)}
    assert pair_sum_set(1, g) == set()
    assert pair_diff_set(2, g) == {(2, 1), (3, 2), (4, 3)}
    assert pair_diff_set(3, g) == {(3, 1), (4, 2)}


def test_theta_sets_worked_grid(worked_grid):
    g = worked_grid
    assert theta_tilde(4, 1, g) == {3}
    assert theta_tilde(1, 1, g) == set()
    assert theta_bar(2, 3, 4, g) == {3}
    # 1.75 + 0.25 - 1.75 = 0.25 lies in cell 1
    assert theta_bar(1, 1, 4, g) == {4}
    assert theta_hat(1, 2, 2, g) == {3}
    assert theta_hat(4, 2, 3, g) == {1}
    for i in range(1, 5):
        assert theta_bar(i, 2, 2, g) == {i}


def test_index_errors(worked_grid):
    with pytest.raises(GridError):
        pair_sum_set(0, worked_grid)
    with pytest.raises(GridError):
        theta_tilde(1, 5, worked_grid)
    with pytest.raises(GridError):
        theta_hat(1.5, 1, 1, worked_grid)


def test_diagonal_never_in_diff_sets(rng):
    g = random_grid(rng)
    for i in range(1, g.I + 1):
        assert all(j > k for j, k in pair_diff_set(i, g))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), uniform=st.booleans())
def test_partition_and_cross_consistency(seed, uniform):
    rng = np.random.default_rng(seed)
    g = build_uniform_grid(1e-9, 10.0, int(rng.integers(2, 16))) if uniform else random_grid(rng)
    I, p = g.I, g.pivots
    sums = [pair_sum_set(i, g) for i in range(1, I + 1)]
    diffs = [pair_diff_set(i, g) for i in range(1, I + 1)]
    for j in range(1, I + 1):
        for k in range(1, I + 1):
            s = p[j - 1] + p[k - 1]
            owners = [i for i in range(I) if (j, k) in sums[i]]
            assert len(owners) == (1 if s <= g.R else 0)
            d = [i for i in range(I) if (j, k) in diffs[i]]
            assert len(d) <= 1
    for i in range(1, I + 1):
        for j in range(1, I + 1):
            assert theta_tilde(i, j, g) == {k for (a, k) in sums[i - 1] if a == j}
    tables = IndexTables.build(g)
    for i in range(I):
        assert {(a + 1, b + 1) for a, b in tables.pair_sum[i]} == sums[i]
        assert {(a + 1, b + 1) for a, b in tables.pair_diff[i]} == diffs[i]


def test_uniform_theta_sets_small():
    g = build_uniform_grid(1e-9, 10.0, 12)
    for i in range(1, 13):
        for j in range(1, 13):
            assert len(theta_tilde(i, j, g)) <= 2
            for k in range(1, 13):
                assert len(theta_bar(i, j, k, g)) <= 2
                assert len(theta_hat(i, j, k, g)) <= 2
