"""Power-law dispersion relation and the seven isotropic collision kernels.

Frequencies are ``omega = |k|**rho``; every kernel is written in terms of the
inverse map ``|k|(omega) = omega**(1/rho)`` and its derivative.  The three-
argument kernels describe 4-wave (2 <-> 2) interactions, with the fourth
frequency eliminated by resonance as ``nu = omega + mu - eta``.  The two-
argument kernels describe 3-wave (1 <-> 2) interactions.

All functions accept scalars or numpy arrays and raise :class:`DomainError`
when any frequency argument is not strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .errors import DomainError

__all__ = [
    "DispersionRelation",
    "KernelParams",
    "k_of_omega",
    "dk_of_omega",
    "kernel_k1",
    "kernel_k2",
    "kernel_k3",
    "kernel_k4",
    "kernel_k5",
    "kernel_k6",
    "kernel_k7",
]


@dataclass(frozen=True)
class DispersionRelation:
    """``omega(k) = |k|**rho`` with ``rho >= 1``."""

    rho: float = 2.0

    def __post_init__(self):
        if not np.isfinite(self.rho) or self.rho < 1.0:
            raise DomainError(f"rho must be >= 1, got {self.rho!r}")

    def k(self, omega):
        return k_of_omega(omega, self)

    def dk(self, omega):
        return dk_of_omega(omega, self)


@dataclass(frozen=True)
class KernelParams:
    """Strengths and homogeneity degrees of the collision kernels.

    ``c1``/``sigma`` belong to the 4-wave kernels K1-K3, ``c2``/``gamma`` to
    the 3-wave kernels K4-K7.
    """

    c1: float = 1.0
    c2: float = 1.0
    sigma: float = 0.5
    gamma: float = 0.5

    def __post_init__(self):
        for name in ("c1", "c2", "sigma", "gamma"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be a finite value >= 0, got {value!r}")


def _check_positive(*args):
    for a in args:
        a = np.asarray(a)
        if a.size and not np.all(a > 0):
            raise DomainError("frequency arguments must be strictly positive")


@njit
def _pow_loop(x, y, out):
    for i in range(x.size):
        out[i] = math.pow(x[i], y)


def _pow(x, y):
    # always libm pow (compiled loop, or a plain loop over math.pow without
    # numba) so table kernels round like scalar code; numpy's vectorised
    # power can differ in the last bit
    arr = np.asarray(x, dtype=np.float64)
    flat = np.ascontiguousarray(arr).reshape(-1)
    out = np.empty_like(flat)
    _pow_loop(flat, float(y), out)
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def _k(x, rho):
    return _pow(x, 1.0 / rho)


def _dk(x, rho):
    return _pow(x, 1.0 / rho - 1.0) / rho


def k_of_omega(omega, disp: DispersionRelation):
    """Wavenumber magnitude ``omega**(1/rho)``."""
    _check_positive(omega)
    return _k(omega, disp.rho)


def dk_of_omega(omega, disp: DispersionRelation):
    """Derivative ``(1/rho) * omega**(1/rho - 1)`` of :func:`k_of_omega`."""
    _check_positive(omega)
    return _dk(omega, disp.rho)


# Unchecked kernel bodies.  Table builders call these after masking out
# non-positive arguments themselves.  Factors are multiplied left to right in
# the order the kernels are usually written.

def _k1(omega, mu, eta, p, rho):
    nu = omega + mu - eta
    km, ke, kn = _k(mu, rho), _k(eta, rho), _k(nu, rho)
    return (p.c1 / _k(omega, rho) * _dk(mu, rho) * _dk(eta, rho) * _dk(nu, rho)
            * km * ke * kn * (km - 2.0 * ke) * _pow(omega * mu * eta * nu, p.sigma))


def _k2(omega, mu, eta, p, rho):
    nu = omega + mu - eta
    ke = _k(eta, rho)
    return (2.0 * p.c1 / _k(omega, rho) * _dk(mu, rho) * _dk(eta, rho) * _dk(nu, rho)
            * _k(mu, rho) * ke * ke * _k(nu, rho) * _pow(omega * mu * eta * nu, p.sigma))


def _k3(omega, mu, eta, p, rho):
    nu = omega + mu - eta
    return (p.c1 * _dk(mu, rho) * _dk(eta, rho) * _dk(nu, rho)
            * _k(mu, rho) * _k(eta, rho) * _k(nu, rho) * _pow(omega * mu * eta * nu, p.sigma))


def _triad(scale, omega, mu, other, rho, gamma):
    # other is omega - mu, omega + mu or mu - omega depending on the kernel
    return (scale * _k(mu, rho) * _k(other, rho) / _k(omega, rho)
            * _dk(mu, rho) * _dk(other, rho) * _pow(omega * mu * other, gamma))


def _k4(omega, mu, p, rho):
    return _triad(p.c2, omega, mu, omega - mu, rho, p.gamma)


def _k5(omega, mu, p, rho):
    return _triad(2.0 * p.c2, omega, mu, omega + mu, rho, p.gamma)


def _k6(omega, mu, p, rho):
    return 2.0 * _k4(omega, mu, p, rho)


def _k7(omega, mu, p, rho):
    return _triad(2.0 * p.c2, omega, mu, mu - omega, rho, p.gamma)


def kernel_k1(omega, mu, eta, p: KernelParams, disp: DispersionRelation):
    """4-wave kernel carrying the ``|k|(mu) - 2|k|(eta)`` factor; may be negative."""
    _check_positive(omega, mu, eta, omega + mu - eta)
    return _k1(omega, mu, eta, p, disp.rho)


def kernel_k2(omega, mu, eta, p: KernelParams, disp: DispersionRelation):
    _check_positive(omega, mu, eta, omega + mu - eta)
    return _k2(omega, mu, eta, p, disp.rho)


def kernel_k3(omega, mu, eta, p: KernelParams, disp: DispersionRelation):
    """4-wave kernel without the ``1/|k|(omega)`` prefactor."""
    _check_positive(omega, mu, eta, omega + mu - eta)
    return _k3(omega, mu, eta, p, disp.rho)


def kernel_k4(omega, mu, p: KernelParams, disp: DispersionRelation):
    """3-wave merging kernel, defined for ``0 < mu < omega``."""
    _check_positive(omega, mu, omega - mu)
    return _k4(omega, mu, p, disp.rho)


def kernel_k5(omega, mu, p: KernelParams, disp: DispersionRelation):
    _check_positive(omega, mu)
    return _k5(omega, mu, p, disp.rho)


def kernel_k6(omega, mu, p: KernelParams, disp: DispersionRelation):
    """Exactly twice :func:`kernel_k4`."""
    _check_positive(omega, mu, omega - mu)
    return _k6(omega, mu, p, disp.rho)


def kernel_k7(omega, mu, p: KernelParams, disp: DispersionRelation):
    """3-wave splitting kernel, defined for ``0 < omega < mu``."""
    _check_positive(omega, mu, mu - omega)
    return _k7(omega, mu, p, disp.rho)
