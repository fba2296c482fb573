import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavekin import _jit
from wavekin.collision import (
    BLOCKS,
    OperatorContext,
    brute_force_rhs,
    brute_force_terms,
    lipschitz_estimate,
    positivity_flux_check,
    rhs,
    term_contributions,
)
from wavekin.dispersion import DispersionRelation, KernelParams, kernel_k4, kernel_k5
from wavekin.errors import DimensionError, DomainError, NonFiniteError
from wavekin.mesh import Grid, build_uniform_grid, locate_cell


def ctx_for(I, params=KernelParams(), rho=2.0, R=10.0, **kw):
    return OperatorContext(build_uniform_grid(1e-9, R, I), params, DispersionRelation(rho), **kw)


def max_rel_dev(a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.abs(a - b) / np.abs(b)
    return float(np.max(np.where(a == b, 0.0, d)))


def test_zero_state_gives_zero_rate():
    ctx = ctx_for(12)
    out = rhs(np.zeros(12), ctx)
    assert np.all(out == 0.0)
    assert np.all(brute_force_rhs(np.zeros(12), ctx) == 0.0)


def test_dimension_mismatch():
    ctx = ctx_for(6)
    with pytest.raises(DimensionError):
        rhs(np.ones(5), ctx)
    with pytest.raises(DimensionError):
        rhs(np.ones((6, 1)), ctx)


@pytest.mark.parametrize("m", [0, 3, 7, 12])
def test_single_mode_three_wave_closed_form(m):
    p = KernelParams(c1=0.0, c2=1.0, sigma=0.5, gamma=0.5)
    d = DispersionRelation(2.0)
    ctx = ctx_for(30, p)
    g = ctx.grid
    n = np.zeros(30)
    n[m] = 0.7
    w = g.pivots[m]
    expected = np.zeros(30)
    expected[m] -= kernel_k5(w, w, p, d) * 0.49
    target = locate_cell(2 * w, g)
    if target is not None:
        expected[target - 1] += kernel_k4(2 * w, w, p, d) * 0.49
    np.testing.assert_allclose(rhs(n, ctx), expected, rtol=1e-13, atol=0)
    np.testing.assert_allclose(brute_force_rhs(n, ctx), expected, rtol=1e-13, atol=0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), I=st.integers(2, 12),
       rho=st.sampled_from([1.0, 2.0, 3.0]), sigma=st.sampled_from([0.0, 0.5, 1.0]),
       gamma=st.sampled_from([0.0, 0.5, 1.0]), c1=st.sampled_from([0.0, 0.5, 1.0]),
       c2=st.sampled_from([0.0, 0.5, 1.0]))
def test_oracle_agreement(seed, I, rho, sigma, gamma, c1, c2):
    ctx = ctx_for(I, KernelParams(c1, c2, sigma, gamma), rho)
    n = np.random.default_rng(seed).random(I)
    assert max_rel_dev(rhs(n, ctx), brute_force_rhs(n, ctx)) < 1e-12


def test_oracle_agreement_per_term_on_nonuniform_grid(rng):
    edges = np.concatenate([[1e-3], rng.uniform(0.1, 1.0, 10)]).cumsum()
    ctx = OperatorContext(Grid(edges))
    n = rng.random(10)
    terms, skipped = brute_force_terms(n, ctx)
    np.testing.assert_allclose(term_contributions(n, ctx), terms, rtol=1e-12, atol=1e-300)
    assert skipped == ctx.guard_hits == 0


def test_oracle_agreement_literal_q6_variant(rng):
    ctx = ctx_for(9, q6_eta="pivot")
    n = rng.random(9)
    assert max_rel_dev(rhs(n, ctx), brute_force_rhs(n, ctx)) < 1e-12


def test_decoupling(rng):
    n = rng.random(10)
    t4 = term_contributions(n, ctx_for(10, KernelParams(0.0, 1.0)))
    assert np.all(t4[:12] == 0.0) and np.any(t4[12:] != 0.0)
    t3 = term_contributions(n, ctx_for(10, KernelParams(1.0, 0.0)))
    assert np.all(t3[12:] == 0.0) and np.any(t3[:12] != 0.0)


def test_block_switches(rng):
    n = rng.random(8)
    full = ctx_for(8)
    total = np.zeros(8)
    for blk in BLOCKS:
        total += rhs(n, full.with_blocks(blk))
    np.testing.assert_allclose(total, rhs(n, full), rtol=1e-12, atol=1e-15)
    t = term_contributions(n, full.with_blocks("k2"))
    assert np.all(t[:4] == 0) and np.all(t[8:] == 0)
    with pytest.raises(ValueError):
        full.with_blocks("k9")


@pytest.mark.parametrize("lam", [2.0, 10.0])
def test_three_wave_homogeneity(rng, lam):
    ctx = ctx_for(16, KernelParams(0.0, 1.0))
    n = rng.random(16)
    np.testing.assert_allclose(rhs(lam * n, ctx), lam ** 2 * rhs(n, ctx), rtol=1e-12, atol=1e-14)


def test_four_wave_homogeneity(rng):
    ctx = ctx_for(12, KernelParams(1.0, 0.0))
    n = rng.random(12)
    np.testing.assert_allclose(rhs(3.0 * n, ctx), 27.0 * rhs(n, ctx), rtol=1e-11, atol=1e-13)


# ------------------------------------------------------------------ positivity helper

def test_positivity_check_preconditions():
    ctx = ctx_for(6)
    n = np.ones(6)
    with pytest.raises(DomainError):
        positivity_flux_check(n, 2, ctx)
    n[1] = 0.0
    n[3] = -1.0
    with pytest.raises(DomainError):
        positivity_flux_check(n, 2, ctx)
    with pytest.raises(DomainError):
        positivity_flux_check(np.zeros(6), 7, ctx)


def test_positivity_check_zero_state():
    ctx = ctx_for(8)
    assert all(positivity_flux_check(np.zeros(8), i, ctx) == 0.0 for i in range(1, 9))


def test_no_resonance_path_gives_exact_zero(worked_grid):
    ctx = OperatorContext(worked_grid)
    n = np.array([0.0, 0.0, 0.0, 1.3])
    assert positivity_flux_check(n, 1, ctx) == 0.0
    assert positivity_flux_check(n, 2, ctx) == 0.0


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), I=st.integers(2, 16))
def test_three_wave_gain_is_nonnegative_into_empty_cell(seed, I):
    # the 3-wave block alone has only non-negative gains into an empty cell
    rng = np.random.default_rng(seed)
    ctx = ctx_for(I, KernelParams(0.0, 1.0))
    n = rng.random(I)
    i = int(rng.integers(1, I + 1))
    n[i - 1] = 0.0
    assert positivity_flux_check(n, i, ctx) >= 0.0


# ------------------------------------------------------------------ Lipschitz

def test_lipschitz_zero_operator():
    assert lipschitz_estimate(ctx_for(10, KernelParams(0.0, 0.0)), 1.0, 5) == 0.0


def test_lipschitz_radius_scaling():
    ctx = ctx_for(16)
    a = lipschitz_estimate(ctx, 1.0, 20, seed=3)
    b = lipschitz_estimate(ctx, 2.0, 20, seed=3)
    assert a < b <= 4.0 * a


def test_lipschitz_reproducible_and_checked():
    ctx = ctx_for(8)
    assert lipschitz_estimate(ctx, 1.0, 5, seed=9) == lipschitz_estimate(ctx, 1.0, 5, seed=9)
    with pytest.raises(DomainError):
        lipschitz_estimate(ctx, 0.0, 5)
    with pytest.raises(DomainError):
        lipschitz_estimate(ctx, 1.0, 0)


# ------------------------------------------------------------------ diagnostics and modes

def test_guard_counter_matches_oracle(rng):
    for _ in range(5):
        edges = np.concatenate([[1e-9], rng.uniform(0.05, 2.0, 9)]).cumsum()
        ctx = OperatorContext(Grid(edges))
        _, skipped = brute_force_terms(rng.random(9), ctx)
        assert ctx.guard_hits == skipped


def test_overflow_is_reported():
    ctx = ctx_for(8, KernelParams(1.0, 1.0, 400.0, 0.0))
    with pytest.raises(NonFiniteError):
        rhs(np.ones(8), ctx)


@pytest.mark.skipif(not _jit.USE_NUMBA, reason="parallel path needs numba")
def test_parallel_matches_sequential_bitwise(rng):
    for I in (5, 17, 40):
        n = rng.random(I)
        seq = rhs(n, ctx_for(I))
        for threads in (1, 2, 4):
            par = rhs(n, ctx_for(I, deterministic=False, threads=threads))
            assert np.array_equal(par, seq)


FALLBACK_SCRIPT = """
import numpy as np
from wavekin._jit import USE_NUMBA
from wavekin.collision import OperatorContext, rhs
from wavekin.mesh import build_uniform_grid
assert not USE_NUMBA
n = np.random.default_rng(5).random(24)
print(' '.join(float(v).hex() for v in rhs(n, OperatorContext(build_uniform_grid(1e-9, 10.0, 24)))))
"""


def test_numpy_fallback_matches_bitwise():
    env = dict(os.environ, WAVEKIN_DISABLE_NUMBA="1")
    proc = subprocess.run([sys.executable, "-c", FALLBACK_SCRIPT], env=env, capture_output=True,
                          text=True, check=True)
    n = np.random.default_rng(5).random(24)
    here = rhs(n, ctx_for(24))
    assert proc.stdout.split() == [float(v).hex() for v in here]
