"""Consistency error of the discrete operator against the exact cell fluxes.

For a smooth density ``f`` the exact rate of change of cell mass ``i`` is the
cell integral of the continuous truncated collision integral,

    F_i = int_{cell i} G(w) dw,   G = G1 + G2 + G3 + G4 - G5 - G6 + G7 + G8,

where ``G1``-``G3`` are the three 4-wave double integrals and ``G4``-``G8``
the 3-wave single integrals on ``(0, R]``.  The consistency error is
``eps_i = F_i - J_i(N)`` with ``N`` the cell masses of ``f``.

Inner integrals use tensor Gauss-Legendre rules after a cosine change of
variables that clusters nodes at both ends (the kernels carry square-root
type endpoint behaviour).  The outer cell integral is composite Simpson.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .collision import OperatorContext, rhs
from .dispersion import DispersionRelation, KernelParams, _k1, _k2, _k3, _k4, _k5, _k6, _k7
from .mesh import Grid, build_uniform_grid

__all__ = [
    "ConsistencyRow",
    "exact_flux_density",
    "reference_fluxes",
    "consistency_error",
    "consistency_study",
]

# sign of each flux in the collision integral
FLUX_SIGNS = np.array([1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0])


def _graded_rule(n):
    """Nodes/weights on (0, 1) clustered at both ends."""
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1.0)
    u = 0.5 * (1.0 - np.cos(np.pi * t))
    du = 0.5 * np.pi * np.sin(np.pi * t) * 0.5 * w
    return u, du


def _integrate(vals, jac, axis):
    # zero-length ranges (w == R or w == 0) contribute nothing; their
    # kernel samples may be inf/nan
    return np.sum(np.where(jac > 0, vals * jac, 0.0), axis=axis)


def exact_flux_density(omega, f: Callable, params: KernelParams, disp: DispersionRelation,
                       R: float, n_inner: int = 48) -> np.ndarray:
    """Unsigned integrands ``G1..G8`` at frequencies ``omega``; shape ``(8, len(omega))``."""
    w = np.atleast_1d(np.asarray(omega, dtype=np.float64))[:, None, None]
    rho = disp.rho
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _flux_density(w, f, params, rho, R, n_inner)


def _flux_density(w, f, params, rho, R, n_inner):
    u, du = _graded_rule(n_inner)
    U, V = u[None, :, None], u[None, None, :]
    DUV = du[None, :, None] * du[None, None, :]
    fw = f(w)

    def quartet_bracket(om, mu, eta):
        nu = om + mu - eta
        return (f(eta) * f(nu) * (f(mu) + f(om)) - f(om) * f(mu) * (f(eta) + f(nu)))

    out = np.empty((8, w.shape[0]))
    # G1: mu in (0, w), eta in (mu, w)
    mu = w * U
    eta = mu + (w - mu) * V
    jac = w * (w - mu) * DUV
    out[0] = _integrate(_k1(w, mu, eta, params, rho) * quartet_bracket(w, mu, eta), jac, (1, 2))
    # G2: mu in (w, R), eta in (0, w); kernel sees (w, mu - w, eta)
    mu = w + (R - w) * U
    eta = w * V
    jac = (R - w) * w * DUV
    d = mu - w
    br = f(eta) * f(mu - eta) * (f(d) + fw) - fw * f(d) * (f(eta) + f(mu - eta))
    out[1] = _integrate(_k2(w, d, eta, params, rho) * br, jac, (1, 2))
    # G3: mu in (w, R), eta in (w, mu)
    mu = w + (R - w) * U
    eta = w + (mu - w) * V
    jac = (R - w) * (mu - w) * DUV
    out[2] = _integrate(_k3(w, mu, eta, params, rho) * quartet_bracket(w, mu, eta), jac, (1, 2))

    w1 = w[:, :, 0]
    u1, du1 = u[None, :], du[None, :]
    fw1 = fw[:, :, 0]
    mu = w1 * u1
    out[3] = _integrate(_k4(w1, mu, params, rho) * f(mu) * f(w1 - mu), w1 * du1, 1)
    mu = R * u1
    out[4] = _integrate(_k5(w1, mu, params, rho) * fw1 * f(mu), R * du1, 1)
    mu = w1 * u1
    out[5] = _integrate(_k6(w1, mu, params, rho) * fw1 * f(mu), w1 * du1, 1)
    mu = w1 + (R - w1) * u1
    out[6] = _integrate(_k7(w1, mu, params, rho) * fw1 * f(mu), (R - w1) * du1, 1)
    out[7] = _integrate(_k7(w1, mu, params, rho) * f(mu) * f(mu - w1), (R - w1) * du1, 1)
    return out


def _simpson_nodes(a, b, panels):
    x = np.linspace(a, b, 2 * panels + 1)
    wts = np.ones(2 * panels + 1)
    wts[1:-1:2] = 4.0
    wts[2:-1:2] = 2.0
    return x, wts * (b - a) / (6.0 * panels)


def reference_fluxes(g: Grid, f: Callable, params: KernelParams, disp: DispersionRelation,
                     panels: int = 32, n_inner: int = 48, chunk: int = 256) -> np.ndarray:
    """Unsigned exact cell fluxes ``F1..F8``; shape ``(8, I)``."""
    R = g.R
    xs, ws, owner = [], [], []
    for i in range(g.I):
        x, wt = _simpson_nodes(g.edges[i], g.edges[i + 1], panels)
        xs.append(x)
        ws.append(wt)
        owner.append(np.full(x.size, i))
    x, wt, owner = np.concatenate(xs), np.concatenate(ws), np.concatenate(owner)
    dens = np.empty((8, x.size))
    for s in range(0, x.size, chunk):
        dens[:, s:s + chunk] = exact_flux_density(x[s:s + chunk], f, params, disp, R, n_inner)
    out = np.zeros((8, g.I))
    for k in range(8):
        out[k] = np.bincount(owner, weights=dens[k] * wt, minlength=g.I)
    return out


def cell_masses(g: Grid, f: Callable, panels: int = 64) -> np.ndarray:
    n = np.empty(g.I)
    for i in range(g.I):
        x, wt = _simpson_nodes(g.edges[i], g.edges[i + 1], panels)
        n[i] = np.dot(wt, f(x))
    return n


def consistency_error(ctx: OperatorContext, f: Callable, panels: int = 32,
                      n_inner: int = 48) -> np.ndarray:
    """Per-cell ``eps_i = F_i - J_i(N)`` for the cell masses ``N`` of ``f``."""
    F = reference_fluxes(ctx.grid, f, ctx.params, ctx.disp, panels, n_inner)
    mask = np.array([
        "k1" in ctx.blocks, "k2" in ctx.blocks, "k3" in ctx.blocks,
    ] + ["three_wave" in ctx.blocks] * 5, dtype=float)
    exact = (FLUX_SIGNS * mask) @ F
    return exact - rhs(cell_masses(ctx.grid, f), ctx)


@dataclass(frozen=True)
class ConsistencyRow:
    cells: int
    delta_omega: float
    eps_l1: float
    observed_order: float  # nan for the first level or when undefined


def consistency_study(levels: Sequence[int], f: Callable, params: KernelParams,
                      disp: DispersionRelation, omega_min: float, R: float,
                      panels: int = 32, n_inner: int = 48,
                      blocks=None) -> list[ConsistencyRow]:
    """``||eps||_1`` on uniform meshes with the given cell counts.

    ``observed_order`` is ``log(eps_prev / eps) / log(dw_prev / dw)``, i.e.
    ``log2`` of the error ratio when the levels double.
    """
    levels = [int(c) for c in levels]
    if len(levels) < 1 or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be a non-empty increasing list of cell counts")
    rows = []
    prev = None
    for cells in levels:
        g = build_uniform_grid(omega_min, R, cells)
        kw = {} if blocks is None else {"blocks": frozenset(blocks)}
        ctx = OperatorContext(g, params, disp, **kw)
        eps = float(np.sum(np.abs(consistency_error(ctx, f, panels, n_inner))))
        order = float("nan")
        if prev is not None and prev[1] > 0 and eps > 0:
            order = float(np.log(prev[1] / eps) / np.log(prev[0] / g.dw_max))
        rows.append(ConsistencyRow(cells, g.dw_max, eps, order))
        prev = (g.dw_max, eps)
    return rows
