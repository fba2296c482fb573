"""Truncated frequency mesh and resonance index sets.

Cells are half-open, ``[w_{i-1/2}, w_{i+1/2})``, except the last one which
also contains the truncation point ``R``.  Pivot combinations such as
``w_j + w_k`` or ``w_j - w_k`` routinely fall exactly on an interior edge of a
uniform mesh; a value lying within ``tie_tol`` below an interior edge is
treated as sitting on that edge, and every tie goes to the cell on the right.
Values below ``omega_min`` or above ``R`` belong to no cell.

Public indices (``CellId``) are 1-based like the discrete equations.  The
``*_index`` helpers and :class:`IndexTables` work with 0-based arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GridError

__all__ = [
    "Grid",
    "IndexTables",
    "build_uniform_grid",
    "locate_cell",
    "locate_index",
    "pair_sum_set",
    "pair_diff_set",
    "theta_tilde",
    "theta_bar",
    "theta_hat",
]

DEFAULT_TIE_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class Grid:
    """Frequency mesh on ``[omega_min, R]`` defined by its ``I + 1`` edges."""

    edges: np.ndarray
    tie_tol: Optional[float] = None
    pivots: np.ndarray = field(init=False, repr=False)
    widths: np.ndarray = field(init=False, repr=False)
    cell_lo: np.ndarray = field(init=False, repr=False)
    cell_hi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.array(self.edges, dtype=np.float64)
        if edges.ndim != 1 or edges.size < 3:
            raise GridError("a grid needs at least 2 cells (3 edges)")
        if not np.all(np.isfinite(edges)):
            raise GridError("grid edges must be finite")
        if edges[0] <= 0.0:
            raise GridError(f"omega_min must be > 0, got {edges[0]!r}")
        widths = np.diff(edges)
        if not np.all(widths > 0):
            raise GridError("grid edges must be strictly increasing")
        tol = DEFAULT_TIE_RTOL * widths.min() if self.tie_tol is None else float(self.tie_tol)
        if not 0.0 <= tol < 0.5 * widths.min():
            raise GridError("tie_tol must lie in [0, min(width)/2)")
        edges.setflags(write=False)
        widths.setflags(write=False)
        pivots = 0.5 * (edges[:-1] + edges[1:])
        pivots.setflags(write=False)
        # membership bounds actually used by every lookup
        lo = edges[:-1] - tol
        lo[0] = edges[0]
        hi = edges[1:] - tol
        hi[-1] = edges[-1]
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "tie_tol", tol)
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "pivots", pivots)
        object.__setattr__(self, "cell_lo", lo)
        object.__setattr__(self, "cell_hi", hi)

    @property
    def I(self) -> int:  # noqa: E743 - matches the usual name for the cell count
        return self.edges.size - 1

    @property
    def omega_min(self) -> float:
        return float(self.edges[0])

    @property
    def R(self) -> float:
        return float(self.edges[-1])

    @property
    def dw_max(self) -> float:
        return float(self.widths.max())

    @property
    def dw_min(self) -> float:
        return float(self.widths.min())

    def is_uniform(self, rtol=1e-12) -> bool:
        return bool(np.allclose(self.widths, self.widths[0], rtol=rtol, atol=0.0))


def build_uniform_grid(omega_min: float, R: float, cells: int, tie_tol=None) -> Grid:
    """Uniform mesh with ``cells`` cells between ``omega_min`` and ``R``."""
    if int(cells) != cells or cells < 2:
        raise GridError(f"cells must be an integer >= 2, got {cells!r}")
    if not (0.0 < omega_min < R) or not np.isfinite(R):
        raise GridError(f"need 0 < omega_min < R, got omega_min={omega_min!r}, R={R!r}")
    cells = int(cells)
    edges = omega_min + np.arange(cells + 1) * ((R - omega_min) / cells)
    edges[-1] = R
    return Grid(edges, tie_tol=tie_tol)


def locate_index(x, g: Grid):
    """Vectorised 0-based cell lookup; ``-1`` marks values outside the mesh."""
    x = np.asarray(x, dtype=np.float64)
    idx = np.searchsorted(g.cell_lo[1:], x, side="right")
    inside = (x >= g.edges[0]) & (x <= g.edges[-1])
    return np.where(inside, idx, -1)


def locate_cell(x: float, g: Grid) -> Optional[int]:
    """1-based cell containing ``x``, or ``None`` when ``x`` is off the mesh."""
    i = int(locate_index(float(x), g))
    return None if i < 0 else i + 1


def _check_cell(i, g):
    if int(i) != i or not 1 <= i <= g.I:
        raise GridError(f"cell index must be in 1..{g.I}, got {i!r}")
    return int(i) - 1


def _check_index(j, g):
    if int(j) != j or not 1 <= j <= g.I:
        raise GridError(f"index must be in 1..{g.I}, got {j!r}")
    return int(j) - 1


def pair_sum_set(i: int, g: Grid) -> set[tuple[int, int]]:
    """Ordered pairs ``(j, k)`` whose pivot sum lies in cell ``i``."""
    i0 = _check_cell(i, g)
    p = g.pivots
    cell = locate_index(p[:, None] + p[None, :], g)
    j, k = np.nonzero(cell == i0)
    return {(int(a) + 1, int(b) + 1) for a, b in zip(j, k)}


def pair_diff_set(i: int, g: Grid) -> set[tuple[int, int]]:
    """Ordered pairs ``(j, k)``, ``j > k``, whose pivot difference lies in cell ``i``."""
    i0 = _check_cell(i, g)
    p = g.pivots
    cell = locate_index(p[:, None] - p[None, :], g)
    j, k = np.nonzero(cell == i0)
    return {(int(a) + 1, int(b) + 1) for a, b in zip(j, k)}


def theta_tilde(i: int, j: int, g: Grid) -> set[int]:
    """Indices ``k`` with ``w_j + w_k`` in cell ``i``."""
    i0, j0 = _check_cell(i, g), _check_index(j, g)
    p = g.pivots
    return {int(k) + 1 for k in np.nonzero(locate_index(p[j0] + p, g) == i0)[0]}


def theta_bar(i: int, j: int, k: int, g: Grid) -> set[int]:
    """Indices ``l`` with ``w_l + w_j - w_k`` in cell ``i``."""
    i0, j0, k0 = _check_cell(i, g), _check_index(j, g), _check_index(k, g)
    p = g.pivots
    return {int(l) + 1 for l in np.nonzero(locate_index(p + p[j0] - p[k0], g) == i0)[0]}


def theta_hat(i: int, j: int, k: int, g: Grid) -> set[int]:
    """Indices ``l`` with ``w_j + w_k - w_l`` in cell ``i``."""
    i0, j0, k0 = _check_cell(i, g), _check_index(j, g), _check_index(k, g)
    p = g.pivots
    return {int(l) + 1 for l in np.nonzero(locate_index(p[j0] + p[k0] - p, g) == i0)[0]}


@dataclass(frozen=True, eq=False)
class IndexTables:
    """Per-cell lists of the pair-sum and pair-difference index sets (0-based).

    ``pair_sum[i]`` is an ``(n, 2)`` array of ``(j, k)`` rows in ascending
    lexicographic order; ``pair_diff`` likewise.
    """

    grid: Grid
    pair_sum: tuple
    pair_diff: tuple

    @classmethod
    def build(cls, g: Grid) -> "IndexTables":
        p = g.pivots
        sums = locate_index(p[:, None] + p[None, :], g)
        diffs = locate_index(p[:, None] - p[None, :], g)
        pair_sum = tuple(np.argwhere(sums == i) for i in range(g.I))
        pair_diff = tuple(np.argwhere(diffs == i) for i in range(g.I))
        return cls(g, pair_sum, pair_diff)
