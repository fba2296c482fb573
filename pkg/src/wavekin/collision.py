"""Discrete collision operator: the 17-term right-hand side of the sectional scheme.

The operator is cubic (4-wave terms 1-12) plus quadratic (3-wave terms 13-17)
in the cell masses ``N``.  Every contribution has the shape
``coef * N[a] * N[b] * N[c]`` for fixed indices and a fixed kernel value, so
an :class:`OperatorContext` precomputes the full list once (the *interaction
table*) and :func:`rhs` reduces to a gather-multiply-accumulate.  Quadratic
entries point ``c`` at a sentinel slot holding ``1.0``.

Composite kernel arguments such as ``w_l + w_k - w_j`` are evaluated at the
exact pivot combination.  Index combinations whose composite argument is not
strictly positive are dropped and counted in ``guard_hits``.

:func:`brute_force_rhs` re-derives every term with exhaustive loops and raw
interval tests; it shares no code with the table path and exists to check it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import FrozenSet, Optional

import numpy as np

from . import _kernels
from ._jit import USE_NUMBA, set_threads
from .dispersion import DispersionRelation, KernelParams, _k1, _k2, _k3, _k4, _k5, _k6, _k7
from .errors import DimensionError, DomainError, NonFiniteError
from .mesh import Grid, IndexTables, locate_index

__all__ = [
    "BLOCKS",
    "TERM_BLOCK",
    "OperatorContext",
    "InteractionTable",
    "rhs",
    "term_contributions",
    "brute_force_rhs",
    "brute_force_terms",
    "positivity_flux_check",
    "lipschitz_estimate",
    "l1_norm",
]

BLOCKS = ("k1", "k2", "k3", "three_wave")
# block owning term q (1-based)
TERM_BLOCK = {q: "k1" for q in range(1, 5)}
TERM_BLOCK.update({q: "k2" for q in range(5, 9)})
TERM_BLOCK.update({q: "k3" for q in range(9, 13)})
TERM_BLOCK.update({q: "three_wave" for q in range(13, 18)})

# Term 6 evaluates K2 at (w_i, w_l + w_k - w_i, eta).  "partner" takes
# eta = w_k, the value the term is derived from and the only reading that is
# consistent with the continuous flux; "pivot" takes eta = w_i literally.
Q6_ETA_CHOICES = ("pivot", "partner")


@dataclass(frozen=True, eq=False)
class InteractionTable:
    """Flat list of collision contributions sorted by target cell.

    Entry ``t`` adds ``coef[t] * n[a[t]] * n[b[t]] * n[c[t]]`` to
    ``out[target[t]]`` where ``n`` is the state with a trailing ``1.0``.
    Within one target, entries follow term number and then the ascending
    summation indices of that term.
    """

    target: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    coef: np.ndarray
    term: np.ndarray
    offsets: np.ndarray
    guard_hits: int

    @property
    def size(self) -> int:
        return int(self.target.size)


@dataclass(frozen=True, eq=False)
class OperatorContext:
    """Immutable bundle of everything :func:`rhs` needs for one mesh.

    ``blocks`` switches the four term groups on or off independently
    (``k1``: terms 1-4, ``k2``: 5-8, ``k3``: 9-12, ``three_wave``: 13-17).
    With ``deterministic=False`` the numba path evaluates target cells in
    parallel; per-cell summation order is the same either way.
    """

    grid: Grid
    params: KernelParams = field(default_factory=KernelParams)
    disp: DispersionRelation = field(default_factory=DispersionRelation)
    blocks: FrozenSet[str] = frozenset(BLOCKS)
    deterministic: bool = True
    threads: Optional[int] = None
    q6_eta: str = "partner"

    def __post_init__(self):
        blocks = frozenset(self.blocks)
        unknown = blocks - set(BLOCKS)
        if unknown:
            raise ValueError(f"unknown block(s): {sorted(unknown)}; choose from {BLOCKS}")
        object.__setattr__(self, "blocks", blocks)
        if self.q6_eta not in Q6_ETA_CHOICES:
            raise ValueError(f"q6_eta must be one of {Q6_ETA_CHOICES}")

    @cached_property
    def tables(self) -> IndexTables:
        return IndexTables.build(self.grid)

    @cached_property
    def table(self) -> InteractionTable:
        return build_interaction_table(self)

    @property
    def guard_hits(self) -> int:
        return self.table.guard_hits

    def with_blocks(self, *blocks) -> "OperatorContext":
        return OperatorContext(self.grid, self.params, self.disp, frozenset(blocks),
                               self.deterministic, self.threads, self.q6_eta)


# ---------------------------------------------------------------------------
# table construction


class _Collector:
    def __init__(self, I):
        self.I = I
        self.parts = []
        self.guard_hits = 0

    def add(self, term, target, a, b, c, coef, keys, valid=None):
        target = np.asarray(target, dtype=np.int64)
        if valid is not None:
            self.guard_hits += int(np.count_nonzero(~valid))
            keep = valid
            target, a, b, c, coef = (x[keep] for x in (target, a, b, c, coef))
            keys = [k[keep] for k in keys]
        keys = list(keys) + [np.zeros_like(target)] * (4 - len(keys))
        self.parts.append((target, np.asarray(a), np.asarray(b), np.asarray(c), coef,
                           np.full(target.size, term, dtype=np.int8), keys))

    def finish(self) -> InteractionTable:
        I = self.I
        if self.parts:
            cols = list(zip(*self.parts))
            target, a, b, c, coef, term = (np.concatenate(col) for col in cols[:6])
            keys = [np.concatenate([p[6][r] for p in self.parts]) for r in range(4)]
        else:
            target = a = b = c = np.zeros(0, dtype=np.int64)
            coef = np.zeros(0)
            term = np.zeros(0, dtype=np.int8)
            keys = [target] * 4
        order = np.lexsort((keys[3], keys[2], keys[1], keys[0], term, target))
        target = np.ascontiguousarray(target[order], dtype=np.int64)
        a = np.ascontiguousarray(a[order], dtype=np.int64)
        b = np.ascontiguousarray(b[order], dtype=np.int64)
        c = np.ascontiguousarray(c[order], dtype=np.int64)
        coef = np.ascontiguousarray(coef[order], dtype=np.float64)
        term = term[order]
        if not np.all(np.isfinite(coef)):
            bad = sorted({int(t) for t in term[~np.isfinite(coef)]})
            raise NonFiniteError(f"kernel evaluation overflowed in term(s) {bad}")
        offsets = np.zeros(I + 1, dtype=np.int64)
        np.cumsum(np.bincount(target, minlength=I), out=offsets[1:])
        for arr in (target, a, b, c, coef, term, offsets):
            arr.setflags(write=False)
        return InteractionTable(target, a, b, c, coef, term, offsets, self.guard_hits)


def _pos(*args):
    ok = np.ones(np.shape(args[0]), dtype=bool)
    for x in args:
        ok &= x > 0.0
    return ok


def _safe(x, ok):
    # keep masked-out lanes away from the kernels' power functions
    return np.where(ok, x, 1.0)


def build_interaction_table(ctx: OperatorContext) -> InteractionTable:
    """Enumerate every (target, a, b, c, coef) contribution for ``ctx``."""
    g, prm, rho = ctx.grid, ctx.params, ctx.disp.rho
    I = g.I
    p = g.pivots
    one = I  # sentinel slot
    col = _Collector(I)
    ar = np.arange(I)
    A, B, C = (x.ravel() for x in np.meshgrid(ar, ar, ar, indexing="ij"))
    loc = lambda x: locate_index(x, g)  # noqa: E731

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if "k1" in ctx.blocks:
            # 1: free (j, k, l); i = cell(w_l + w_k - w_j); j < k < i
            j, k, l = A, B, C
            x = p[l] + p[k] - p[j]
            i = loc(x)
            m = (j < k) & (k < i)
            j, k, l, i, x = j[m], k[m], l[m], i[m], x[m]
            ok = _pos(x, x + p[j] - p[k])
            coef = _k1(_safe(x, ok), p[j], p[k], prm, rho)
            col.add(1, i, j, k, l, coef, (j, k, l), ok)
            # 2: free (i, j, l); k = cell(w_l + w_j - w_i); k < j < i
            i, j, l = A, B, C
            y = p[l] + p[j] - p[i]
            k = loc(y)
            m = (k >= 0) & (k < j) & (j < i)
            i, j, l, k, y = i[m], j[m], l[m], k[m], y[m]
            ok = _pos(y, p[i] + y - p[j])
            coef = _k1(p[i], _safe(y, ok), p[j], prm, rho)
            col.add(2, i, i, j, l, coef, (j, k, l), ok)
            # 3: j < k < i
            i, j, k = A, B, C
            m = (j < k) & (k < i)
            i, j, k = i[m], j[m], k[m]
            coef = -_k1(p[i], p[j], p[k], prm, rho)
            col.add(3, i, i, j, k, coef, (j, k))
            # 4: free (i, j, l); k = cell(w_i + w_j - w_l); j < k < i
            i, j, l = A, B, C
            z = p[i] + p[j] - p[l]
            k = loc(z)
            m = (j < k) & (k < i)
            i, j, l, k, z = i[m], j[m], l[m], k[m], z[m]
            ok = _pos(z, p[i] + p[j] - z)
            coef = -_k1(p[i], p[j], _safe(z, ok), prm, rho)
            col.add(4, i, i, j, l, coef, (j, k, l), ok)

        if "k2" in ctx.blocks:
            # 5: free (k, l, m); j = cell(w_k + w_l), i = cell(w_l + w_k - w_m); k < i < j
            k, l, mm = A, B, C
            j = loc(p[k] + p[l])
            x = p[l] + p[k] - p[mm]
            i = loc(x)
            msk = (i >= 0) & (k < i) & (j > i)
            k, l, mm, j, i, x = k[msk], l[msk], mm[msk], j[msk], i[msk], x[msk]
            ok = _pos(x, x + p[mm] - p[k])
            coef = _k2(_safe(x, ok), p[mm], p[k], prm, rho)
            col.add(5, i, k, l, mm, coef, (j, k, l, mm), ok)
            # 6: free (i, k, l); j = cell(w_k + w_l); k < i < j
            i, k, l = A, B, C
            j = loc(p[k] + p[l])
            msk = (k < i) & (j > i)
            i, k, l, j = i[msk], k[msk], l[msk], j[msk]
            y = p[l] + p[k] - p[i]
            eta = p[i] if ctx.q6_eta == "pivot" else p[k]
            ok = _pos(y, p[i] + y - eta)
            coef = _k2(p[i], _safe(y, ok), _safe(eta, ok), prm, rho)
            col.add(6, i, i, k, l, coef, (j, k, l), ok)
            # 7: free (i, k, l); j = cell(w_i + w_l); k < i < j
            i, k, l = A, B, C
            j = loc(p[i] + p[l])
            msk = (k < i) & (j > i)
            i, k, l, j = i[msk], k[msk], l[msk], j[msk]
            coef = -_k2(p[i], p[l], p[k], prm, rho)
            col.add(7, i, i, k, l, coef, (j, k, l))
            # 8: free (i, l, m); j = cell(w_i + w_l), k = cell(w_i + w_l - w_m); k < i < j
            i, l, mm = A, B, C
            j = loc(p[i] + p[l])
            z = p[i] + p[l] - p[mm]
            k = loc(z)
            msk = (k >= 0) & (k < i) & (j > i)
            i, l, mm, j, k, z = i[msk], l[msk], mm[msk], j[msk], k[msk], z[msk]
            ok = _pos(z, p[i] + p[l] - z)
            coef = -_k2(p[i], p[l], _safe(z, ok), prm, rho)
            col.add(8, i, i, l, mm, coef, (j, k, l, mm), ok)

        if "k3" in ctx.blocks:
            # 9: free (j, k, l); i = cell(w_l + w_k - w_j); i < k < j
            j, k, l = A, B, C
            x = p[l] + p[k] - p[j]
            i = loc(x)
            m = (i >= 0) & (i < k) & (k < j)
            j, k, l, i, x = j[m], k[m], l[m], i[m], x[m]
            ok = _pos(x, x + p[j] - p[k])
            coef = _k3(_safe(x, ok), p[j], p[k], prm, rho)
            col.add(9, i, j, k, l, coef, (j, k, l), ok)
            # 10: free (i, j, m); k = cell(w_m + w_j - w_i); i < j < k
            i, j, mm = A, B, C
            y = p[mm] + p[j] - p[i]
            k = loc(y)
            m = (i < j) & (j < k)
            i, j, mm, k, y = i[m], j[m], mm[m], k[m], y[m]
            ok = _pos(y, p[i] + y - p[j])
            coef = _k3(p[i], _safe(y, ok), p[j], prm, rho)
            col.add(10, i, i, j, mm, coef, (j, k, mm), ok)
            # 11: i < k < j
            i, j, k = A, B, C
            m = (i < k) & (k < j)
            i, j, k = i[m], j[m], k[m]
            coef = -_k3(p[i], p[j], p[k], prm, rho)
            col.add(11, i, i, j, k, coef, (j, k))
            # 12: free (i, j, l); k = cell(w_i + w_j - w_l); i < k < j
            i, j, l = A, B, C
            z = p[i] + p[j] - p[l]
            k = loc(z)
            m = (i < k) & (k < j)
            i, j, l, k, z = i[m], j[m], l[m], k[m], z[m]
            ok = _pos(z, p[i] + p[j] - z)
            coef = -_k3(p[i], p[j], _safe(z, ok), prm, rho)
            col.add(12, i, i, j, l, coef, (j, k, l), ok)

        if "three_wave" in ctx.blocks:
            J, K = (x.ravel() for x in np.meshgrid(ar, ar, indexing="ij"))
            sent = np.full(J.size, one)
            # 13: (j, k) with w_j + w_k in cell i
            s = p[J] + p[K]
            i = loc(s)
            m = i >= 0
            coef = _k4(s[m], p[J[m]], prm, rho)
            col.add(13, i[m], J[m], K[m], sent[m], coef, (J[m], K[m]))
            # 14: all j
            coef = -_k5(p[J], p[K], prm, rho)
            col.add(14, J, J, K, sent, coef, (K,))
            # 15: j < i
            m = K < J
            coef = -_k6(p[J[m]], p[K[m]], prm, rho)
            col.add(15, J[m], J[m], K[m], sent[m], coef, (K[m],))
            # 16: j > i
            m = K > J
            coef = _k7(p[J[m]], p[K[m]], prm, rho)
            col.add(16, J[m], J[m], K[m], sent[m], coef, (K[m],))
            # 17: (j, k) with w_j - w_k in cell i
            d = p[J] - p[K]
            i = loc(d)
            m = (i >= 0) & (J > K)
            coef = _k7(d[m], p[J[m]], prm, rho)
            col.add(17, i[m], J[m], K[m], sent[m], coef, (J[m], K[m]))

    return col.finish()


# ---------------------------------------------------------------------------
# evaluation


def _as_state(state, I) -> np.ndarray:
    n = np.asarray(state, dtype=np.float64)
    if n.ndim != 1 or n.size != I:
        raise DimensionError(f"state must be a vector of length {I}, got shape {n.shape}")
    return n


def _extended(n):
    ext = np.empty(n.size + 1)
    ext[:-1] = n
    ext[-1] = 1.0
    return ext


def rhs(state, ctx: OperatorContext, out: Optional[np.ndarray] = None) -> np.ndarray:
    """Collision rate ``dN/dt`` for the cell masses ``state``."""
    I = ctx.grid.I
    n = _as_state(state, I)
    t = ctx.table
    if out is None:
        out = np.empty(I)
    ext = _extended(n)
    if not USE_NUMBA:
        _kernels.apply_table_numpy(ext, t.target, t.term, t.a, t.b, t.c, t.coef, out)
    elif ctx.deterministic:
        _kernels.apply_table_seq(ext, t.target, t.term, t.a, t.b, t.c, t.coef, out)
    else:
        if ctx.threads is not None:
            set_threads(ctx.threads)
        _kernels.apply_table_par(ext, t.offsets, t.term, t.a, t.b, t.c, t.coef, out)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("collision rate is not finite")
    return out


def term_contributions(state, ctx: OperatorContext) -> np.ndarray:
    """Array of shape ``(17, I)``; row ``q - 1`` holds term ``q`` for every cell."""
    I = ctx.grid.I
    n = _as_state(state, I)
    t = ctx.table
    ext = _extended(n)
    prod = t.coef * ext[t.a] * ext[t.b] * ext[t.c]
    flat = (t.term.astype(np.int64) - 1) * I + t.target
    return np.bincount(flat, weights=prod, minlength=17 * I).reshape(17, I)


def brute_force_terms(state, ctx: OperatorContext) -> tuple[np.ndarray, int]:
    """Exhaustive-loop evaluation of all 17 terms; returns ``(terms, skipped)``.

    Disabled blocks are zeroed afterwards so the result lines up with
    :func:`term_contributions`.
    """
    g = ctx.grid
    n = _as_state(state, g.I)
    prm = ctx.params
    out = np.zeros((17, g.I))
    skipped = _kernels.brute_force_terms(
        np.ascontiguousarray(n), np.ascontiguousarray(g.pivots),
        np.ascontiguousarray(g.cell_lo), np.ascontiguousarray(g.cell_hi),
        float(prm.c1), float(prm.c2), float(prm.sigma), float(ctx.disp.rho),
        float(prm.gamma), ctx.q6_eta == "partner", out)
    for q, blk in TERM_BLOCK.items():
        if blk not in ctx.blocks:
            out[q - 1] = 0.0
    return out, int(skipped)


def brute_force_rhs(state, ctx: OperatorContext) -> np.ndarray:
    """Reference collision rate from :func:`brute_force_terms` (O(I^4) work)."""
    terms, _ = brute_force_terms(state, ctx)
    acc = np.zeros(ctx.grid.I)
    for q in range(17):
        acc += terms[q]
    return acc


def positivity_flux_check(state, i: int, ctx: OperatorContext) -> float:
    """Rate of the empty cell ``i`` (1-based) for a non-negative ``state``.

    Raises :class:`DomainError` unless ``state >= 0`` and ``state[i-1] == 0``.
    """
    n = _as_state(state, ctx.grid.I)
    if int(i) != i or not 1 <= i <= ctx.grid.I:
        raise DomainError(f"cell index must be in 1..{ctx.grid.I}, got {i!r}")
    if np.any(n < 0):
        raise DomainError("state must be non-negative")
    if n[i - 1] != 0.0:
        raise DomainError(f"state[{i}] must be exactly 0, got {n[i - 1]!r}")
    return float(rhs(n, ctx)[i - 1])


def l1_norm(n) -> float:
    return float(np.sum(np.abs(n)))


def _random_ball_point(rng, I, radius):
    v = rng.random(I) * (rng.random(I) < rng.uniform(0.3, 1.0))
    s = v.sum()
    if s == 0.0:
        v[rng.integers(I)] = 1.0
        s = 1.0
    return v * (radius * rng.random() / s)


def _base_state(t, rng, I, radius):
    # trials 0..I-1 put all mass in one cell, highest frequency first; later
    # trials alternate between random sparse states and two-cell mixtures
    if t < I:
        n = np.zeros(I)
        n[I - 1 - t] = radius
        return n
    if t % 2 == 0:
        n = _random_ball_point(rng, I, 1.0)
        return n * (radius / n.sum())
    n = np.zeros(I)
    a, b = rng.choice(I, size=2, replace=False)
    s = rng.random()
    n[a], n[b] = s * radius, (1.0 - s) * radius
    return n


def lipschitz_estimate(ctx: OperatorContext, ball_radius: float, trials: int,
                       seed: int = 0, rel_step: float = 1e-6) -> float:
    """Largest observed ``||J(N) - J(M)||_1 / ||N - M||_1`` over non-negative pairs.

    Every pair lies in the ball ``||.||_1 <= ball_radius``.  Each trial picks
    a base state ``N`` and compares it with ``N + h e_m`` for every cell ``m``
    (this resolves the local slope, whose supremum is the Lipschitz constant
    on a convex set) and with one independent random state.
    """
    if not ball_radius > 0:
        raise DomainError("ball_radius must be > 0")
    if int(trials) != trials or trials < 1:
        raise DomainError("trials must be a positive integer")
    rng = np.random.default_rng(seed)
    I = ctx.grid.I
    h = rel_step * float(ball_radius)
    best = 0.0
    for t in range(int(trials)):
        n = _base_state(t, rng, I, ball_radius - h)
        jn = rhs(n, ctx).copy()
        for m in range(I):
            nm = n.copy()
            nm[m] += h
            best = max(best, l1_norm(rhs(nm, ctx) - jn) / h)
        other = _random_ball_point(rng, I, ball_radius)
        den = l1_norm(n - other)
        if den > 0.0:
            best = max(best, l1_norm(rhs(other, ctx) - jn) / den)
    return float(best)
