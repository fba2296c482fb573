"""Initial data, time stepping and observables for the semi-discrete system."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .collision import OperatorContext, rhs
from .dispersion import DispersionRelation, KernelParams, _dk, _k
from .errors import ConfigError, DimensionError, DomainError, NonFiniteError
from .mesh import Grid, build_uniform_grid

__all__ = [
    "IndicatorDensity",
    "TabulatedDensity",
    "ic_exp_decay",
    "ic_bump",
    "ic_monodisperse",
    "INITIAL_CONDITIONS",
    "project_initial_condition",
    "SimConfig",
    "ObservableSeries",
    "RunResult",
    "observables",
    "step",
    "run",
]

INTEGRATORS = ("euler", "rk4")


# ---------------------------------------------------------------------------
# initial conditions


def ic_exp_decay(omega):
    """``omega * exp(-omega)``."""
    omega = np.asarray(omega, dtype=np.float64)
    return omega * np.exp(-omega)


def ic_bump(omega):
    """Smooth bump ``exp(5 / ((omega - 5)**2 - 1))`` supported on ``|omega - 5| < 1``."""
    omega = np.asarray(omega, dtype=np.float64)
    s = (omega - 5.0) ** 2 - 1.0
    inside = s < 0.0
    with np.errstate(divide="ignore"):
        val = np.exp(5.0 / np.where(inside, s, -1.0))
    return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class IndicatorDensity:
    """``value`` on the closed interval ``[lo, hi]``, zero elsewhere.

    Projection integrates this exactly by interval overlap.
    """

    lo: float
    hi: float
    value: float = 1.0

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError("indicator needs hi > lo")
        if self.value < 0:
            raise DomainError("indicator value must be >= 0")

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=np.float64)
        return np.where((omega >= self.lo) & (omega <= self.hi), self.value, 0.0)

    def cell_integrals(self, g: Grid) -> np.ndarray:
        a = np.maximum(g.edges[:-1], self.lo)
        b = np.minimum(g.edges[1:], self.hi)
        return self.value * np.clip(b - a, 0.0, None)


ic_monodisperse = IndicatorDensity(0.5, 1.5, 1.0)


@dataclass(frozen=True, eq=False)
class TabulatedDensity:
    """Piecewise-linear density through ``(omega, f)`` samples, zero outside."""

    omega: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=np.float64)
        v = np.asarray(self.f, dtype=np.float64)
        if w.ndim != 1 or w.shape != v.shape or w.size < 2:
            raise DimensionError("tabulated density needs matching 1-d omega/f with >= 2 rows")
        if np.any(np.diff(w) <= 0):
            raise DomainError("tabulated omega values must be strictly increasing")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
            raise DomainError("tabulated density must be finite")
        if np.any(v < 0):
            raise DomainError("tabulated density has negative values")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "f", v)

    @classmethod
    def from_csv(cls, path) -> "TabulatedDensity":
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        if data.shape[1] < 2:
            raise DimensionError(f"{path}: expected two columns omega,f")
        return cls(data[:, 0], data[:, 1])

    def __call__(self, omega):
        return np.interp(omega, self.omega, self.f, left=0.0, right=0.0)


INITIAL_CONDITIONS = {
    "exp_decay": ic_exp_decay,
    "bump": ic_bump,
    "monodisperse": ic_monodisperse,
}


def project_initial_condition(f_in: Callable, g: Grid, panels: int = 64) -> np.ndarray:
    """Cell masses ``N_i = int_{cell i} f_in``.

    Indicator densities are integrated exactly; anything else uses composite
    Simpson with ``panels`` sub-intervals per cell.
    """
    if isinstance(f_in, IndicatorDensity):
        return f_in.cell_integrals(g)
    if panels < 1:
        raise DomainError("panels must be >= 1")
    t = np.linspace(0.0, 1.0, 2 * panels + 1)
    wts = np.ones(t.size)
    wts[1:-1:2] = 4.0
    wts[2:-1:2] = 2.0
    wts /= 6.0 * panels
    x = g.edges[:-1, None] + g.widths[:, None] * t[None, :]
    vals = np.asarray(f_in(x), dtype=np.float64)
    if vals.shape != x.shape:
        vals = np.broadcast_to(vals, x.shape)
    if not np.all(np.isfinite(vals)):
        raise DomainError("initial density is not finite on the mesh")
    if np.any(vals < 0):
        raise DomainError("initial density is negative somewhere on the mesh")
    return (vals @ wts) * g.widths


# ---------------------------------------------------------------------------
# configuration and results


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to reproduce one simulation."""

    rho: float = 2.0
    c1: float = 1.0
    c2: float = 1.0
    sigma: float = 0.5
    gamma: float = 0.5
    omega_min: float = 1e-9
    omega_max: float = 10.0
    cells: int = 30
    dt: float = 0.1
    t_end: float = 30.0
    ic: str = "exp_decay"
    ic_file: Optional[str] = None
    integrator: str = "euler"
    snapshot_times: tuple = ()
    deterministic: bool = True
    negativity_clamp: bool = False
    threads: Optional[int] = None

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"must be > 0, got {self.dt!r}", key="dt")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ConfigError(f"must be >= 0, got {self.t_end!r}", key="t_end")
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"must be one of {INTEGRATORS}, got {self.integrator!r}",
                              key="integrator")
        if self.ic not in INITIAL_CONDITIONS and self.ic != "tabulated":
            raise ConfigError(f"unknown initial condition {self.ic!r}", key="ic")
        if self.ic == "tabulated" and not self.ic_file:
            raise ConfigError("ic = tabulated needs ic_file", key="ic_file")
        times = tuple(float(t) for t in self.snapshot_times)
        for t in times:
            if not 0.0 <= t <= self.t_end:
                raise ConfigError(f"snapshot time {t!r} outside [0, t_end]", key="snapshot_times")
        object.__setattr__(self, "snapshot_times", times)

    @property
    def disp(self) -> DispersionRelation:
        return DispersionRelation(self.rho)

    @property
    def params(self) -> KernelParams:
        return KernelParams(self.c1, self.c2, self.sigma, self.gamma)

    def grid(self) -> Grid:
        return build_uniform_grid(self.omega_min, self.omega_max, self.cells)

    def context(self, grid: Optional[Grid] = None) -> OperatorContext:
        return OperatorContext(grid or self.grid(), self.params, self.disp,
                               deterministic=self.deterministic, threads=self.threads)

    def initial_density(self) -> Callable:
        if self.ic == "tabulated":
            return TabulatedDensity.from_csv(self.ic_file)
        return INITIAL_CONDITIONS[self.ic]

    def steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9))


@dataclass
class ObservableSeries:
    """Per-step observables.  ``mass`` uses the same measure weight as ``energy``."""

    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    m3: np.ndarray
    negativity_events: np.ndarray
    l1: np.ndarray
    min_n: np.ndarray


@dataclass
class RunResult:
    config: SimConfig
    grid: Grid
    series: ObservableSeries
    initial: np.ndarray
    final: np.ndarray
    snapshots: dict = field(default_factory=dict)  # t -> N at that step
    guard_hits: int = 0

    def density(self, n: np.ndarray) -> np.ndarray:
        return n / self.grid.widths


def observables(state, g: Grid, disp: DispersionRelation) -> tuple[float, float, float]:
    """``(mass, energy, m3)``: moments 0, 1 and 3 with weight ``|k|^2 |k|'``."""
    n = np.asarray(state, dtype=np.float64)
    if n.shape != (g.I,):
        raise DimensionError(f"state must have length {g.I}")
    w = g.pivots
    weight = _k(w, disp.rho) ** 2 * _dk(w, disp.rho) * n
    return float(np.sum(weight)), float(np.sum(w * weight)), float(np.sum(w ** 3 * weight))


# ---------------------------------------------------------------------------
# time stepping


def step(state, ctx: OperatorContext, dt: float, method: str = "euler",
         clamp: bool = False) -> np.ndarray:
    """One explicit step of size ``dt``; ``clamp`` zeroes negative components."""
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt!r}")
    n = np.asarray(state, dtype=np.float64)
    if method == "euler":
        new = n + dt * rhs(n, ctx)
    elif method == "rk4":
        k1 = rhs(n, ctx)
        k2 = rhs(n + 0.5 * dt * k1, ctx)
        k3 = rhs(n + 0.5 * dt * k2, ctx)
        k4 = rhs(n + dt * k3, ctx)
        new = n + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:
        raise ValueError(f"unknown integrator {method!r}; choose from {INTEGRATORS}")
    if not np.all(np.isfinite(new)):
        raise NonFiniteError("state became non-finite")
    if clamp:
        np.maximum(new, 0.0, out=new)
    return new


def _snapshot_steps(cfg: SimConfig, nsteps: int) -> dict:
    times = cfg.snapshot_times or (0.0, cfg.t_end)
    # first step whose time is at or after the requested time
    out = {}
    for t in times:
        out.setdefault(min(nsteps, int(math.ceil(t / cfg.dt - 1e-9))), t)
    return out


def run(cfg: SimConfig, ctx: Optional[OperatorContext] = None,
        state0: Optional[np.ndarray] = None) -> RunResult:
    """March from ``t = 0`` to ``t_end`` recording observables after every step.

    The last step is shortened when ``t_end`` is not a multiple of ``dt``.
    Negative components are counted each step (before any clamping).
    """
    ctx = ctx or cfg.context()
    g = ctx.grid
    n = project_initial_condition(cfg.initial_density(), g) if state0 is None \
        else np.array(state0, dtype=np.float64)
    nsteps = cfg.steps()
    want = _snapshot_steps(cfg, nsteps)
    times = np.empty(nsteps + 1)
    cols = np.empty((4, nsteps + 1))
    neg = np.zeros(nsteps + 1, dtype=np.int64)
    min_n = np.empty(nsteps + 1)
    snaps = {}

    def record(k, t, state):
        times[k] = t
        cols[0, k], cols[1, k], cols[2, k] = observables(state, g, ctx.disp)
        cols[3, k] = float(np.sum(np.abs(state)))
        min_n[k] = float(state.min())
        if k in want:
            snaps[want[k]] = state.copy()

    initial = n.copy()
    neg[0] = int(np.count_nonzero(n < 0))
    record(0, 0.0, n)
    for k in range(1, nsteps + 1):
        t_prev = (k - 1) * cfg.dt
        t = cfg.t_end if k == nsteps else k * cfg.dt
        try:
            n = step(n, ctx, t - t_prev, cfg.integrator)
        except NonFiniteError as exc:
            raise NonFiniteError(f"non-finite state at step {k} (t = {t:.6g}): {exc}") from exc
        neg[k] = int(np.count_nonzero(n < 0))
        if cfg.negativity_clamp:
            np.maximum(n, 0.0, out=n)
        record(k, t, n)

    total = int(neg.sum())
    if nsteps and total > 0.01 * g.I * nsteps:
        warnings.warn(f"{total} negative components over {nsteps} steps "
                      f"(> 1% of {g.I * nsteps}); consider a smaller dt", RuntimeWarning)
    series = ObservableSeries(times, cols[0], cols[1], cols[2], neg, cols[3], min_n)
    return RunResult(cfg, g, series, initial, n, snaps, ctx.guard_hits)
