"""Numba-jitted twin of the simplex kernels.

Keep the pivot arithmetic in lockstep with `_simplex_py`: same operation
order, no fastmath, so both backends round identically.
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_BREAKDOWN = 2


@njit(
    "Tuple((float64[:, ::1], int64[::1]))(float64[:, ::1], float64[::1])",
    cache=True,
    nogil=True,
)
def _build_tableau(a, b):
    m, n = a.shape
    k = 0
    for i in range(m):
        if b[i] < 0.0:
            k += 1
    ncols = n + m + k + 1
    T = np.zeros((m + 1, ncols))
    basis = np.empty(m, dtype=np.int64)

    ai = n + m
    for i in range(m):
        sg = -1.0 if b[i] < 0.0 else 1.0
        for j in range(n):
            T[i, j] = sg * a[i, j]
        T[i, n + i] = sg
        T[i, ncols - 1] = sg * b[i]
        if b[i] < 0.0:
            T[i, ai] = 1.0
            basis[i] = ai
            ai += 1
        else:
            basis[i] = n + i

    for j in range(n + m, n + m + k):
        T[m, j] = 1.0
    for i in range(m):
        if basis[i] >= n + m:
            for j in range(ncols):
                T[m, j] -= T[i, j]
    return T, basis


@njit(
    "int64(float64[:, ::1], int64[::1], int64, int64, float64, int64)",
    cache=True,
    nogil=True,
)
def _pivot_loop(T, basis, m, enter_limit, tol, max_pivots):
    ncols = T.shape[1]
    pivots = 0
    while True:
        enter = -1
        for j in range(enter_limit):
            if T[m, j] < -tol:
                enter = j
                break
        if enter < 0:
            return STATUS_OK
        if pivots >= max_pivots:
            return STATUS_BREAKDOWN

        lr = -1
        best = np.inf
        bestvar = np.int64(2**62)
        for i in range(m):
            piv = T[i, enter]
            if piv > tol:
                r = T[i, ncols - 1] / piv
                if r < best:
                    best = r
                    lr = i
                    bestvar = basis[i]
                elif r == best and basis[i] < bestvar:
                    lr = i
                    bestvar = basis[i]
        if lr < 0:
            return STATUS_BREAKDOWN

        pv = T[lr, enter]
        for j in range(ncols):
            T[lr, j] = T[lr, j] / pv
        for i in range(m + 1):
            if i == lr:
                continue
            f = T[i, enter]
            for j in range(ncols):
                T[i, j] -= f * T[lr, j]
        basis[lr] = enter
        pivots += 1


@njit(
    "float64[:](float64[:, ::1], int64[::1], int64, int64)",
    cache=True,
    nogil=True,
)
def _extract(T, basis, m, n):
    ncols = T.shape[1]
    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, ncols - 1]
    for j in range(n):
        if x[j] < 0.0:
            x[j] = 0.0
    return x


@njit(
    "Tuple((int64, float64, float64[:]))(float64[:, ::1], float64[::1], float64, int64)",
    cache=True,
    nogil=True,
)
def phase1_feasible(a, b, tol, max_pivots):
    m, n = a.shape
    T, basis = _build_tableau(a, b)
    status = _pivot_loop(T, basis, m, T.shape[1] - 1, tol, max_pivots)
    if status != STATUS_OK:
        return STATUS_BREAKDOWN, 0.0, np.zeros(n)
    obj = -T[m, T.shape[1] - 1]
    return STATUS_OK, obj, _extract(T, basis, m, n)


@njit(
    "Tuple((int64, boolean, float64[:]))(float64[:, ::1], float64[::1], "
    "float64[::1], float64, float64, int64)",
    cache=True,
    nogil=True,
)
def phase2_maximize(a, b, c, tol, feas_tol, max_pivots):
    m, n = a.shape
    T, basis = _build_tableau(a, b)
    ncols = T.shape[1]
    status = _pivot_loop(T, basis, m, ncols - 1, tol, max_pivots)
    if status != STATUS_OK:
        return STATUS_BREAKDOWN, False, np.zeros(n)
    if -T[m, ncols - 1] > feas_tol:
        return STATUS_OK, False, np.zeros(n)

    for j in range(ncols):
        T[m, j] = 0.0
    for j in range(n):
        T[m, j] = -c[j]
    for i in range(m):
        if basis[i] < n:
            cb = c[basis[i]]
            for j in range(ncols):
                T[m, j] += cb * T[i, j]
    status = _pivot_loop(T, basis, m, n + m, tol, max_pivots)
    if status != STATUS_OK:
        return STATUS_BREAKDOWN, True, np.zeros(n)
    return STATUS_OK, True, _extract(T, basis, m, n)
