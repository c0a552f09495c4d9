"""Pure-numpy simplex kernels: phase-1 feasibility and a phase-2 witness
polish.

Reference implementation of the dense tableau simplex with Bland's rule.
`_simplex_numba.py` carries the jitted twin; both must follow the same
arithmetic, element for element, so that backend choice never changes a
feasibility verdict or witness.
"""

import numpy as np

#: kernel completed (objective and witness valid)
STATUS_OK = 0
#: pivot budget exhausted or unbounded column (numerical breakdown)
STATUS_BREAKDOWN = 2


def _build_tableau(a, b):
    m, n = a.shape
    neg = b < 0.0
    k = int(neg.sum())
    ncols = n + m + k + 1
    T = np.zeros((m + 1, ncols))
    basis = np.empty(m, dtype=np.int64)

    ai = n + m
    for i in range(m):
        sg = -1.0 if neg[i] else 1.0
        T[i, :n] = sg * a[i]
        T[i, n + i] = sg
        T[i, ncols - 1] = sg * b[i]
        if neg[i]:
            T[i, ai] = 1.0
            basis[i] = ai
            ai += 1
        else:
            basis[i] = n + i

    # reduced-cost row for min(sum of artificials)
    T[m, n + m : n + m + k] = 1.0
    for i in range(m):
        if basis[i] >= n + m:
            T[m, :] -= T[i, :]
    return T, basis


def _pivot_loop(T, basis, m, enter_limit, tol, max_pivots):
    """Bland-rule simplex iterations on an in-canonical-form tableau.

    Entering candidates are columns [0, enter_limit); returns STATUS_OK on
    optimality or STATUS_BREAKDOWN on pivot-budget/unbounded breakdown.
    """
    ncols = T.shape[1]
    pivots = 0
    while True:
        red = T[m, :enter_limit]
        entering_mask = red < -tol
        if not entering_mask.any():
            return STATUS_OK
        if pivots >= max_pivots:
            return STATUS_BREAKDOWN
        enter = int(np.argmax(entering_mask))  # Bland: smallest index

        col = T[:m, enter]
        ok = col > tol
        if not ok.any():
            return STATUS_BREAKDOWN
        ratios = np.full(m, np.inf)
        ratios[ok] = T[:m, ncols - 1][ok] / col[ok]
        best = ratios.min()
        ties = np.flatnonzero(ratios == best)
        lr = int(ties[np.argmin(basis[ties])])  # Bland tie-break: smallest basis var

        pv = T[lr, enter]
        T[lr, :] = T[lr, :] / pv
        factors = T[:, enter].copy()
        factors[lr] = 0.0
        T -= factors[:, None] * T[lr, :][None, :]
        basis[lr] = enter
        pivots += 1


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


def phase1_feasible(a, b, tol, max_pivots):
    """Run phase-1 simplex on {x >= 0 : a x <= b}.

    Returns (status, objective, x) where objective is the minimized sum of
    artificial variables (zero iff feasible, up to tolerance) and x is the
    first-n slice of the final basic solution.
    """
    m, n = a.shape
    T, basis = _build_tableau(a, b)
    status = _pivot_loop(T, basis, m, T.shape[1] - 1, tol, max_pivots)
    if status != STATUS_OK:
        return STATUS_BREAKDOWN, 0.0, np.zeros(n)
    obj = -T[m, T.shape[1] - 1]
    return STATUS_OK, obj, _extract(T, basis, m, n)


def phase2_maximize(a, b, c, tol, feas_tol, max_pivots):
    """Maximize c.x over {x >= 0 : a x <= b} via phase-1 then phase-2.

    Returns (status, feasible, x). Artificial columns never re-enter in
    phase 2; an unbounded improving ray reports breakdown.
    """
    m, n = a.shape
    T, basis = _build_tableau(a, b)
    ncols = T.shape[1]
    status = _pivot_loop(T, basis, m, ncols - 1, tol, max_pivots)
    if status != STATUS_OK:
        return STATUS_BREAKDOWN, False, np.zeros(n)
    if -T[m, ncols - 1] > feas_tol:
        return STATUS_OK, False, np.zeros(n)

    # swap in the real objective (minimize -c.x) and rebuild reduced costs
    T[m, :] = 0.0
    T[m, :n] = -c
    for i in range(m):
        if basis[i] < n:
            T[m, :] += c[basis[i]] * T[i, :]
    status = _pivot_loop(T, basis, m, n + m, tol, max_pivots)
    if status != STATUS_OK:
        return STATUS_BREAKDOWN, True, np.zeros(n)
    return STATUS_OK, True, _extract(T, basis, m, n)
