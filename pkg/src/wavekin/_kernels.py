"""Hot loops: interaction-table application and the brute-force oracle.

Every function here is decorated with :func:`wavekin._jit.njit`; with
``WAVEKIN_DISABLE_NUMBA=1`` they run as plain Python.  Table application also
has a vectorised numpy twin (:func:`apply_table_numpy`), which is what the
dispatcher in :mod:`wavekin.collision` uses when numba is off.

The oracle kernels below are written out independently of
:mod:`wavekin.dispersion` on purpose: the oracle must not share code with the
table route it checks.
"""

import math

import numpy as np

from ._jit import njit, prange


# Each target accumulates one partial sum per term (in table order) and adds
# the partials term by term, mirroring how the oracle combines its terms.

@njit
def apply_table_seq(n_ext, target, term, a, b, c, coef, out):
    out[:] = 0.0
    if target.size == 0:
        return out
    cur_i = target[0]
    cur_q = term[0]
    acc = 0.0
    for t in range(target.size):
        if target[t] != cur_i or term[t] != cur_q:
            out[cur_i] += acc
            acc = 0.0
            cur_i = target[t]
            cur_q = term[t]
        acc += coef[t] * n_ext[a[t]] * n_ext[b[t]] * n_ext[c[t]]
    out[cur_i] += acc
    return out


@njit(parallel=True)
def apply_table_par(n_ext, offsets, term, a, b, c, coef, out):
    for i in prange(offsets.size - 1):
        total = 0.0
        acc = 0.0
        lo = offsets[i]
        for t in range(lo, offsets[i + 1]):
            if t > lo and term[t] != term[t - 1]:
                total += acc
                acc = 0.0
            acc += coef[t] * n_ext[a[t]] * n_ext[b[t]] * n_ext[c[t]]
        out[i] = total + acc
    return out


def apply_table_numpy(n_ext, target, term, a, b, c, coef, out):
    prod = coef * n_ext[a] * n_ext[b] * n_ext[c]
    flat = (term.astype(np.int64) - 1) * out.size + target
    parts = np.bincount(flat, weights=prod, minlength=17 * out.size).reshape(17, out.size)
    out[:] = 0.0
    for q in range(17):
        out += parts[q]
    return out


# ---------------------------------------------------------------------------
# brute-force oracle

@njit
def _kk(x, rho):
    return math.pow(x, 1.0 / rho)


@njit
def _dkk(x, rho):
    return math.pow(x, 1.0 / rho - 1.0) / rho


@njit
def ok_k1(w, m, e, c1, sigma, rho):
    v = w + m - e
    return (c1 / _kk(w, rho) * _dkk(m, rho) * _dkk(e, rho) * _dkk(v, rho)
            * _kk(m, rho) * _kk(e, rho) * _kk(v, rho) * (_kk(m, rho) - 2.0 * _kk(e, rho))
            * math.pow(w * m * e * v, sigma))


@njit
def ok_k2(w, m, e, c1, sigma, rho):
    v = w + m - e
    return (2.0 * c1 / _kk(w, rho) * _dkk(m, rho) * _dkk(e, rho) * _dkk(v, rho)
            * _kk(m, rho) * _kk(e, rho) * _kk(e, rho) * _kk(v, rho)
            * math.pow(w * m * e * v, sigma))


@njit
def ok_k3(w, m, e, c1, sigma, rho):
    v = w + m - e
    return (c1 * _dkk(m, rho) * _dkk(e, rho) * _dkk(v, rho)
            * _kk(m, rho) * _kk(e, rho) * _kk(v, rho) * math.pow(w * m * e * v, sigma))


@njit
def ok_k4(w, m, c2, gamma, rho):
    o = w - m
    return (c2 * _kk(m, rho) * _kk(o, rho) / _kk(w, rho)
            * _dkk(m, rho) * _dkk(o, rho) * math.pow(w * m * o, gamma))


@njit
def ok_k5(w, m, c2, gamma, rho):
    o = w + m
    return (2.0 * c2 * _kk(m, rho) * _kk(o, rho) / _kk(w, rho)
            * _dkk(m, rho) * _dkk(o, rho) * math.pow(w * m * o, gamma))


@njit
def ok_k6(w, m, c2, gamma, rho):
    o = w - m
    return (2.0 * c2 * _kk(m, rho) * _kk(o, rho) / _kk(w, rho)
            * _dkk(m, rho) * _dkk(o, rho) * math.pow(w * m * o, gamma))


@njit
def ok_k7(w, m, c2, gamma, rho):
    o = m - w
    return (2.0 * c2 * _kk(m, rho) * _kk(o, rho) / _kk(w, rho)
            * _dkk(m, rho) * _dkk(o, rho) * math.pow(w * m * o, gamma))


@njit
def in_cell(x, i, lo, hi):
    """Raw-inequality membership test of ``x`` in 0-based cell ``i``."""
    if i == hi.size - 1:
        return lo[i] <= x and x <= hi[i]
    return lo[i] <= x and x < hi[i]


@njit
def _pos3(w, m, e):
    return w > 0.0 and m > 0.0 and e > 0.0 and w + m - e > 0.0


@njit
def brute_force_terms(n, p, lo, hi, c1, c2, sigma, rho, gamma, k6_eta_k, out):
    """Evaluate each of the 17 discrete collision terms by exhaustive loops.

    ``out`` has shape ``(17, I)``; row ``q`` receives term ``q + 1``.  Loops
    follow the nesting of the discrete sums literally and accumulate in
    ascending index order.  Returns the number of skipped evaluations whose
    frequency arguments were not all positive.
    """
    I = n.size
    skipped = 0
    out[:, :] = 0.0
    for i in range(I):
        pi = p[i]
        # K1 block: j < k < i
        acc = 0.0
        for j in range(0, i - 1):
            for k in range(j + 1, i):
                for l in range(I):
                    x = p[l] + p[k] - p[j]
                    if in_cell(x, i, lo, hi):
                        if _pos3(x, p[j], p[k]):
                            acc += ok_k1(x, p[j], p[k], c1, sigma, rho) * n[j] * n[k] * n[l]
                        else:
                            skipped += 1
        out[0, i] = acc
        acc = 0.0
        for j in range(1, i):
            for k in range(0, j):
                for l in range(I):
                    y = p[l] + p[j] - pi
                    if in_cell(y, k, lo, hi):
                        if _pos3(pi, y, p[j]):
                            acc += ok_k1(pi, y, p[j], c1, sigma, rho) * n[i] * n[j] * n[l]
                        else:
                            skipped += 1
        out[1, i] = acc
        acc = 0.0
        for j in range(0, i - 1):
            for k in range(j + 1, i):
                acc += -ok_k1(pi, p[j], p[k], c1, sigma, rho) * n[i] * n[j] * n[k]
        out[2, i] = acc
        acc = 0.0
        for j in range(0, i - 1):
            for k in range(j + 1, i):
                for l in range(I):
                    z = pi + p[j] - p[l]
                    if in_cell(z, k, lo, hi):
                        if _pos3(pi, p[j], z):
                            acc += -ok_k1(pi, p[j], z, c1, sigma, rho) * n[i] * n[j] * n[l]
                        else:
                            skipped += 1
        out[3, i] = acc
        # K2 block: k < i < j
        acc = 0.0
        for j in range(i + 1, I):
            for k in range(0, i):
                for l in range(I):
                    if in_cell(p[k] + p[l], j, lo, hi):
                        for m in range(I):
                            x = p[l] + p[k] - p[m]
                            if in_cell(x, i, lo, hi):
                                if _pos3(x, p[m], p[k]):
                                    acc += ok_k2(x, p[m], p[k], c1, sigma, rho) * n[k] * n[l] * n[m]
                                else:
                                    skipped += 1
        out[4, i] = acc
        acc = 0.0
        for j in range(i + 1, I):
            for k in range(0, i):
                for l in range(I):
                    if in_cell(p[k] + p[l], j, lo, hi):
                        y = p[l] + p[k] - pi
                        e = p[k] if k6_eta_k else pi
                        if _pos3(pi, y, e):
                            acc += ok_k2(pi, y, e, c1, sigma, rho) * n[i] * n[k] * n[l]
                        else:
                            skipped += 1
        out[5, i] = acc
        acc = 0.0
        for j in range(i + 1, I):
            for k in range(0, i):
                for l in range(I):
                    if in_cell(pi + p[l], j, lo, hi):
                        if _pos3(pi, p[l], p[k]):
                            acc += -ok_k2(pi, p[l], p[k], c1, sigma, rho) * n[i] * n[k] * n[l]
                        else:
                            skipped += 1
        out[6, i] = acc
        acc = 0.0
        for j in range(i + 1, I):
            for k in range(0, i):
                for l in range(I):
                    if in_cell(pi + p[l], j, lo, hi):
                        for m in range(I):
                            z = pi + p[l] - p[m]
                            if in_cell(z, k, lo, hi):
                                if _pos3(pi, p[l], z):
                                    acc += -ok_k2(pi, p[l], z, c1, sigma, rho) * n[i] * n[l] * n[m]
                                else:
                                    skipped += 1
        out[7, i] = acc
        # K3 block: i < k < j
        acc = 0.0
        for j in range(i + 2, I):
            for k in range(i + 1, j):
                for l in range(I):
                    x = p[l] + p[k] - p[j]
                    if in_cell(x, i, lo, hi):
                        if _pos3(x, p[j], p[k]):
                            acc += ok_k3(x, p[j], p[k], c1, sigma, rho) * n[j] * n[k] * n[l]
                        else:
                            skipped += 1
        out[8, i] = acc
        acc = 0.0
        for j in range(i + 1, I):
            for k in range(j + 1, I):
                for m in range(I):
                    y = p[m] + p[j] - pi
                    if in_cell(y, k, lo, hi):
                        if _pos3(pi, y, p[j]):
                            acc += ok_k3(pi, y, p[j], c1, sigma, rho) * n[i] * n[j] * n[m]
                        else:
                            skipped += 1
        out[9, i] = acc
        acc = 0.0
        for j in range(i + 2, I):
            for k in range(i + 1, j):
                acc += -ok_k3(pi, p[j], p[k], c1, sigma, rho) * n[i] * n[j] * n[k]
        out[10, i] = acc
        acc = 0.0
        for j in range(i + 2, I):
            for k in range(i + 1, j):
                for l in range(I):
                    z = pi + p[j] - p[l]
                    if in_cell(z, k, lo, hi):
                        if _pos3(pi, p[j], z):
                            acc += -ok_k3(pi, p[j], z, c1, sigma, rho) * n[i] * n[j] * n[l]
                        else:
                            skipped += 1
        out[11, i] = acc
        # 3-wave block
        acc = 0.0
        for j in range(I):
            for k in range(I):
                s = p[k] + p[j]
                if in_cell(s, i, lo, hi):
                    acc += ok_k4(s, p[j], c2, gamma, rho) * n[j] * n[k]
        out[12, i] = acc
        acc = 0.0
        for j in range(I):
            acc += -ok_k5(pi, p[j], c2, gamma, rho) * n[i] * n[j]
        out[13, i] = acc
        acc = 0.0
        for j in range(0, i):
            acc += -ok_k6(pi, p[j], c2, gamma, rho) * n[i] * n[j]
        out[14, i] = acc
        acc = 0.0
        for j in range(i + 1, I):
            acc += ok_k7(pi, p[j], c2, gamma, rho) * n[i] * n[j]
        out[15, i] = acc
        acc = 0.0
        for j in range(I):
            for k in range(I):
                d = p[j] - p[k]
                if in_cell(d, i, lo, hi):
                    acc += ok_k7(d, p[j], c2, gamma, rho) * n[j] * n[k]
        out[16, i] = acc
    return skipped
