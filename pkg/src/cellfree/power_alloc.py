"""SINR model coefficients, uniform and max-min power allocation, and the
iterative precoding/allocation loop.

For a fixed precoder the per-user SINR is a ratio of linear functions of
the power coefficients eta, so the max-min problem is quasilinear: bisect
on the common target t and answer each midpoint with a linear feasibility
problem (phase-1 simplex in `numerics`). Uniform allocation is the closed
form that lets the most loaded AP transmit at full power.
"""

from dataclasses import dataclass, field

import numpy as np

from . import precoding
from .errors import DegeneratePrecoder, SolverFailure
from .numerics import LinearFeasibilityProblem, lp_feasible, lp_maximize


@dataclass(frozen=True)
class SinrModel:
    """Fixed-precoder SINR coefficients; SINR(eta) is then a cheap ratio.

    psi[u]      desired-signal gain |ghat_u^T p_u|^2
    phi[u, i]   interference gain |ghat_u^T p_i|^2 (diagonal zeroed, unused)
    gamma_err[u, i]  CSI-error leakage sum_m (1-n) beta[m,u] |p[m,i]|^2
    delta[m, i] per-AP per-user power |p[m,i]|^2
    """

    psi: np.ndarray
    phi: np.ndarray
    gamma_err: np.ndarray
    delta: np.ndarray
    rho_f: float
    sigma_w2: float


@dataclass(frozen=True)
class PowerCoefficients:
    eta: np.ndarray
    achieved_min_sinr: float
    scheme: str  # UPA | OPA


@dataclass
class BisectionTrace:
    """Optional per-step record (t_b, t_e, midpoint feasible) for debugging."""

    steps: list = field(default_factory=list)

    def record(self, t_b, t_e, feasible):
        self.steps.append((t_b, t_e, feasible))


def sinr_model(g_hat, p, beta, n, rho_f, sigma_w2):
    a = g_hat.T @ p  # a[u, i] = ghat_u^T p_i
    mag2 = np.abs(a) ** 2
    psi = np.diagonal(mag2).copy()
    phi = mag2.copy()
    np.fill_diagonal(phi, 0.0)
    delta = np.abs(p) ** 2
    gamma_err = ((1.0 - n) * beta).T @ delta
    return SinrModel(psi=psi, phi=phi, gamma_err=gamma_err, delta=delta,
                     rho_f=rho_f, sigma_w2=sigma_w2)


def sinr(eta, model):
    eta = np.asarray(eta, dtype=float)
    num = model.rho_f * eta * model.psi
    den = (model.sigma_w2 + model.rho_f * (model.phi @ eta)
           + model.rho_f * (model.gamma_err @ eta))
    return num / den


def upa(model):
    """Equal power coefficients with the most loaded AP at full power."""
    row_sums = model.delta.sum(axis=1)
    peak = row_sums.max()
    if peak <= 0.0:
        raise DegeneratePrecoder("all per-AP power coefficients are zero")
    eta = np.full(model.psi.shape[0], 1.0 / peak)
    return PowerCoefficients(eta=eta, scheme="UPA",
                             achieved_min_sinr=float(sinr(eta, model).min()))


def _feasibility_problem(t, model):
    """Rearrange SINR_u(eta) >= t and the per-AP budgets into A eta <= b."""
    u = model.psi.shape[0]
    coeff = model.rho_f * np.diag(model.psi) - t * model.rho_f * (
        model.phi + model.gamma_err
    )
    a_sinr = -coeff
    b_sinr = np.full(u, -t * model.sigma_w2)
    a_ub = np.vstack([a_sinr, model.delta])
    b_ub = np.concatenate([b_sinr, np.ones(model.delta.shape[0])])
    return LinearFeasibilityProblem(a_ub=a_ub, b_ub=b_ub)


def feasibility(t, model):
    """Decide whether some eta >= 0 meets SINR target t within the per-AP
    budgets; returns (feasible, witness-or-None)."""
    if t < 0.0:
        raise ValueError("SINR target must be nonnegative")
    return lp_feasible(_feasibility_problem(t, model))


def single_user_bounds(model):
    """Interference-free SINR caps rho_f psi_u eta_u^max / sigma_w2."""
    peak_delta = model.delta.max(axis=0)
    eta_max = np.where(peak_delta > 0.0, 1.0 / np.maximum(peak_delta, 1e-300),
                       0.0)
    return model.rho_f * model.psi * eta_max / model.sigma_w2


def opa_bisection(model, t_hi_init=None, eps=1e-3, trace=None):
    """Max-min power allocation by bisection over linear feasibility.

    Starts from [0, t_e] with t_e the smallest single-user SINR cap (an
    upper bound: interference only hurts); halves until the interval is
    below eps * initial t_e. The uniform allocation seeds the witness so
    the result never falls below UPA by more than the tolerance.

    The max-min optimum pins only the bottleneck user, so among the optimal
    allocations the returned one maximizes total radiated power at the
    final target: without the polish the witness strands most APs far below
    their budget and starves the non-bottleneck users.
    """
    upa_pc = upa(model)
    t_e = float(t_hi_init) if t_hi_init is not None else float(
        single_user_bounds(model).min())
    if t_e <= 0.0:
        return PowerCoefficients(eta=upa_pc.eta, scheme="OPA",
                                 achieved_min_sinr=upa_pc.achieved_min_sinr)
    for _ in range(64):  # cap doubling if the bound is unexpectedly reachable
        ok, witness = feasibility(t_e, model)
        if not ok:
            break
        t_e *= 2.0
    t_b = 0.0
    eps_abs = eps * t_e
    eta = upa_pc.eta
    while (t_e - t_b) >= eps_abs:
        t = 0.5 * (t_b + t_e)
        ok, witness = feasibility(t, model)
        if trace is not None:
            trace.record(t_b, t_e, ok)
        if ok:
            t_b = t
            eta = witness
        else:
            t_e = t
    if t_b > 0.0:
        radiated = model.delta.sum(axis=0)
        try:
            ok, polished = lp_maximize(_feasibility_problem(t_b, model),
                                       radiated)
            if ok:
                eta = polished
        except SolverFailure:
            pass  # keep the plain bisection witness
    load = model.delta @ eta
    peak = load.max(initial=0.0)
    if peak > 1.0:  # trim witness-tolerance overshoot of the AP budgets
        eta = eta / peak
    return PowerCoefficients(eta=eta, scheme="OPA",
                             achieved_min_sinr=float(sinr(eta, model).min()))


def allocate(model, scheme, eps=1e-3, trace=None):
    if scheme == "UPA":
        return upa(model)
    if scheme == "OPA":
        return opa_bisection(model, eps=eps, trace=trace)
    raise ValueError(f"unknown power allocation scheme {scheme!r}")


@dataclass
class PipelineResult:
    """Final pairing of an assembled precoder with its power coefficients."""

    kind: str
    scheme: str
    p: np.ndarray
    eta: np.ndarray
    f: float
    model: SinrModel  # coefficients of the final assembled precoder
    precoder: precoding.PrecoderResult
    pc: PowerCoefficients


def pa_loop(prec, g_hat, beta, n, params, scheme, iters_pa=2, eta_init=None,
            eps=1e-3, trace=None):
    """Alternate precoder assembly and power allocation.

    Iteration j assembles P[j] against N[j], then solves the allocation for
    N[j+1] with P[j] fixed. The returned pairing (P[last], N[last+1]) uses
    different N's on purpose: the allocation is solved against exactly the
    precoder it is transmitted with.
    """
    if iters_pa < 1:
        raise ValueError("iters_pa must be >= 1")
    u = g_hat.shape[1]
    eta = np.ones(u) if eta_init is None else np.asarray(eta_init, dtype=float)
    p_j, model, pc = None, None, None
    for _ in range(iters_pa):
        p_j = precoding.assemble_precoder(prec.p_tilde, prec.f, params, eta)
        model = sinr_model(g_hat, p_j, beta, n, params.rho_f, params.sigma_w2)
        pc = allocate(model, scheme, eps=eps, trace=trace)
        eta = pc.eta
    prec.p = p_j
    return PipelineResult(kind=prec.kind, scheme=scheme, p=p_j, eta=pc.eta,
                          f=prec.f, model=model, precoder=prec, pc=pc)


def algorithm1(g_hat, beta, n, params, scheme="UPA", iters_prec=2, iters_pa=2,
               gamma_base_grid=precoding.GAMMA_BASE_GRID, eps=1e-3,
               events=None, trace=None):
    """Full iterative robust pipeline.

    The allocation loop is seeded with the MMSE precoder's coefficients
    under the same scheme, then the robust precoder (fixed after its own
    iteration) is re-paired with refreshed allocations.
    """
    mmse = precoding.mmse_precoder(g_hat, params)
    mmse_run = pa_loop(mmse, g_hat, beta, n, params, scheme,
                       iters_pa=iters_pa, eps=eps, trace=trace)
    robust = precoding.rmmse_iterate(g_hat, beta, n, params,
                                     iters_prec=iters_prec,
                                     gamma_base_grid=gamma_base_grid,
                                     events=events)
    return pa_loop(robust, g_hat, beta, n, params, scheme, iters_pa=iters_pa,
                   eta_init=mmse_run.eta, eps=eps, trace=trace)


def run_pipeline(kind, g_hat, beta, n, params, scheme="UPA", iters_prec=2,
                 iters_pa=2, gamma_base_grid=precoding.GAMMA_BASE_GRID,
                 eps=1e-3, events=None, trace=None):
    """Precoder construction + power allocation for any of the four kinds."""
    if kind == "RMMSE":
        return algorithm1(g_hat, beta, n, params, scheme, iters_prec,
                          iters_pa, gamma_base_grid, eps, events, trace)
    if kind == "MMSE":
        prec = precoding.mmse_precoder(g_hat, params)
    elif kind == "ZF":
        prec = precoding.zero_forcing(g_hat, params)
    elif kind == "CB":
        prec = precoding.conjugate_beamforming(g_hat, params)
    else:
        raise ValueError(f"unknown precoder kind {kind!r}")
    return pa_loop(prec, g_hat, beta, n, params, scheme, iters_pa=iters_pa,
                   eps=eps, trace=trace)
