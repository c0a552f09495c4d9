"""Dense numerical kernels: Hermitian solves and phase-1 LP feasibility.

The LP kernel is the hot loop of max-min power allocation (one solve per
bisection step per realization). It ships in two interchangeable builds:
a numba-jitted kernel and a pure-numpy fallback. Selection happens once at
import time from the ``CELLFREE_NUMBA`` environment variable ("0" forces
the numpy path); both produce identical verdicts and witnesses.
"""

import os
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import get_lapack_funcs

from ..errors import IllConditioned, SolverFailure

from . import _simplex_py

_want_numba = os.environ.get("CELLFREE_NUMBA", "1") != "0"
if _want_numba:
    try:
        from . import _simplex_numba as _simplex_default
        USING_NUMBA = True
    except ImportError:
        _simplex_default = _simplex_py
        USING_NUMBA = False
else:
    _simplex_default = _simplex_py
    USING_NUMBA = False

#: pivot / reduced-cost tolerance for the simplex kernels
PIVOT_TOL = 1e-11
#: phase-1 objective threshold on the row-equilibrated system
FEAS_TOL = 1e-9
#: witness re-check tolerance (absolute, row-equilibrated system)
WITNESS_TOL = 1e-9
#: refuse Hermitian solves beyond this 1-norm condition estimate
COND_THRESHOLD = 1e12
#: relative Hermitian-symmetry defect tolerated before a solve
HERMITIAN_TOL = 1e-10


def backend_name():
    return "numba" if USING_NUMBA else "numpy"


@dataclass(frozen=True)
class HermitianSystem:
    """A X = B with A Hermitian (possibly indefinite)."""

    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class LinearFeasibilityProblem:
    """Find x >= 0 with a_ub @ x <= b_ub (all rows are <=-constraints)."""

    a_ub: np.ndarray
    b_ub: np.ndarray


def hermitian_solve(a, b, cond_threshold=COND_THRESHOLD):
    """Solve A X = B for Hermitian A via LU with a condition-estimate gate.

    Partial-pivoted LU handles the indefinite case (the robust loading term
    can push diagonal entries negative). A 1-norm condition estimate above
    `cond_threshold` raises IllConditioned; the residual is verified and
    refined once if needed.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    herm_defect = np.linalg.norm(a - a.conj().T)
    if herm_defect > HERMITIAN_TOL * max(np.linalg.norm(a), 1e-300):
        raise ValueError("matrix is not Hermitian within tolerance")

    anorm = np.linalg.norm(a, 1)
    try:
        with warnings.catch_warnings():
            # exact singularity is reported through the rcond gate below
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(a)
    except np.linalg.LinAlgError as exc:
        raise IllConditioned(np.inf) from exc
    gecon = get_lapack_funcs(("gecon",), (lu,))[0]
    rcond, info = gecon(lu, anorm)
    if info != 0 or not np.isfinite(rcond) or rcond <= 0.0:
        raise IllConditioned(np.inf)
    cond = 1.0 / rcond
    if cond > cond_threshold:
        raise IllConditioned(cond)

    x = lu_solve((lu, piv), b)
    bnorm = np.linalg.norm(b)
    resid = np.linalg.norm(a @ x - b)
    if resid > 1e-8 * bnorm:
        x = x + lu_solve((lu, piv), b - a @ x)
        resid = np.linalg.norm(a @ x - b)
        if resid > 1e-8 * bnorm:
            raise SolverFailure(
                f"hermitian solve residual {resid:.3e} exceeds 1e-8*||B||"
            )
    return x


def solve_system(sys, cond_threshold=COND_THRESHOLD):
    return hermitian_solve(sys.a, sys.b, cond_threshold)


def _equilibrate(a, b):
    scale = np.maximum(np.abs(a).max(axis=1), np.abs(b))
    scale[scale == 0.0] = 1.0
    return a / scale[:, None], b / scale


def _checked_inputs(prob):
    a = np.ascontiguousarray(prob.a_ub, dtype=np.float64)
    b = np.ascontiguousarray(prob.b_ub, dtype=np.float64)
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise SolverFailure("non-finite coefficients in feasibility problem")
    return a, b


def _validate_witness(a_s, b_s, x):
    slack = a_s @ x - b_s
    if slack.max(initial=-np.inf) > WITNESS_TOL or (x < 0.0).any():
        raise SolverFailure(
            f"simplex witness violates constraints by {slack.max():.3e}"
        )


def lp_feasible(prob, backend=None):
    """Exact phase-1 verdict for a small dense feasibility problem.

    Returns (feasible, witness-or-None). Every `feasible` verdict ships a
    witness revalidated against the constraints; numerical breakdown raises
    SolverFailure instead of being folded into "infeasible".
    """
    kernel = backend or _simplex_default
    a, b = _checked_inputs(prob)
    m, n = a.shape

    a_s, b_s = _equilibrate(a, b)
    max_pivots = 100 * (2 * m + n)
    status, obj, x = kernel.phase1_feasible(a_s, b_s, PIVOT_TOL, max_pivots)
    if status != _simplex_py.STATUS_OK:
        raise SolverFailure("phase-1 simplex pivot budget exhausted")
    if obj > FEAS_TOL:
        return False, None
    _validate_witness(a_s, b_s, x)
    return True, x


def lp_maximize(prob, c, backend=None):
    """Maximize c.x over the feasibility region (phase-1 then phase-2).

    Returns (feasible, witness-or-None); the witness is an optimal basic
    solution. Row equilibration leaves the objective untouched.
    """
    kernel = backend or _simplex_default
    a, b = _checked_inputs(prob)
    c = np.ascontiguousarray(c, dtype=np.float64)
    if not np.isfinite(c).all():
        raise SolverFailure("non-finite objective in phase-2 problem")
    m, n = a.shape

    a_s, b_s = _equilibrate(a, b)
    max_pivots = 200 * (2 * m + n)
    status, feasible, x = kernel.phase2_maximize(a_s, b_s, c, PIVOT_TOL,
                                                 FEAS_TOL, max_pivots)
    if status != _simplex_py.STATUS_OK:
        raise SolverFailure("phase-2 simplex pivot budget exhausted")
    if not feasible:
        return False, None
    _validate_witness(a_s, b_s, x)
    return True, x
