"""Downlink precoders: conjugate beamforming, zero forcing, MMSE and the
iterative robust MMSE with generalized loading.

All constructors return an inner matrix P_tilde plus the transmit-side gain
normalization f = sqrt(E_tr / (sigma_s^2 ||P_tilde||_F^2)); the physical
precoder is assembled later as P = (f / sqrt(rho_f)) * P_tilde * N^{-1}
against a power-allocation matrix N = diag(sqrt(eta)).

The robust variant augments the MMSE Gram matrix with a diagonal correction
built from the CSI-error statistics, scaled by a regularization weight that
is grid-searched to maximize the minimum per-user SINR under uniform power.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (IllConditioned, SingularChannel, SingularSystem,
                     SolverFailure, ZeroPowerEntry, ZeroPrecoder)
from . import numerics

#: regularization-weight grid in units of the problem's natural scale.
#: Signed: the loading correction depends only on the product gamma * theta,
#: so with theta = -1 the useful loading direction sits at negative gamma.
GAMMA_BASE_GRID = (0.0,
                   1e-3, 10**-2.5, 1e-2, 10**-1.5, 1e-1, 10**-0.5, 1.0,
                   -1e-3, -10**-2.5, -1e-2, -10**-1.5, -1e-1, -10**-0.5, -1.0)
THETA_DEFAULT = -1.0


@dataclass(frozen=True)
class PowerParams:
    """Power and noise scalars shared by precoding and allocation."""

    rho_f: float  # per-AP maximum transmit power (W)
    e_tr: float  # total power budget (W)
    sigma_w2: float  # receiver noise variance (W)
    sigma_s2: float  # symbol variance (C_s = sigma_s2 * I)
    c_w_trace: float  # U * sigma_w2

    @classmethod
    def for_network(cls, rho_f, m_aps, u_users, sigma_w2, sigma_s2=1.0):
        return cls(rho_f=rho_f, e_tr=m_aps * rho_f, sigma_w2=sigma_w2,
                   sigma_s2=sigma_s2, c_w_trace=u_users * sigma_w2)


@dataclass
class PrecoderResult:
    p_tilde: np.ndarray  # (M, U) inner precoder
    f: float  # receiver AGC normalization, > 0
    kind: str  # CB | ZF | MMSE | RMMSE
    gamma_reg: float = 0.0
    theta: float = THETA_DEFAULT
    p: np.ndarray | None = None  # assembled precoder, filled by the PA loop


def normalization_f(p_tilde, sigma_s2, e_tr):
    """Gain making the average transmit power meet the budget exactly."""
    fro2 = sigma_s2 * float(np.linalg.norm(p_tilde) ** 2)
    if fro2 == 0.0:
        raise ZeroPrecoder("inner precoder has zero Frobenius norm")
    return float(np.sqrt(e_tr / fro2))


def conjugate_beamforming(g_hat, params):
    p_tilde = g_hat.conj()
    return PrecoderResult(p_tilde=p_tilde, kind="CB",
                          f=normalization_f(p_tilde, params.sigma_s2, params.e_tr))


def zero_forcing(g_hat, params, cond_threshold=numerics.COND_THRESHOLD):
    """Channel inverse: P_tilde = G^* (G^T G^*)^{-1}, so G^T P_tilde = I."""
    gram = g_hat.T @ g_hat.conj()  # (U, U) Hermitian
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > cond_threshold:
        raise SingularChannel(f"ZF Gram condition {cond:.3e}")
    p_tilde = np.linalg.solve(gram.T, g_hat.conj().T).T
    return PrecoderResult(p_tilde=p_tilde, kind="ZF",
                          f=normalization_f(p_tilde, params.sigma_s2, params.e_tr))


def loading_matrix(beta, n, theta=THETA_DEFAULT):
    """Diagonal of the CSI-error moment matrix, scaled by theta.

    Entry m is theta * sum_u (1-n) * beta[m, u]; identically zero under
    perfect CSI.
    """
    return theta * (1.0 - n) * beta.sum(axis=1)


def rmmse_step(g_hat, m_diag, gamma_reg, f_prev, p_tilde_prev, params,
               events=None):
    """One closed-form update of the inner robust precoder.

    Solves (G^* G^T + (tr C_w / E_tr) I + F) P_tilde = G^* where the
    diagonal correction F is built from the previous iterate:
    F = gamma * f^2 (E_tr M - f^2 tr(M P C_s P^H) I) / (rho_f E_tr).
    gamma_reg = 0 yields the plain MMSE inner precoder.
    """
    m_aps = g_hat.shape[0]
    gram = g_hat.conj() @ g_hat.T
    ridge = params.c_w_trace / params.e_tr
    diag = np.full(m_aps, ridge)
    if gamma_reg != 0.0 and m_diag is not None and np.any(m_diag != 0.0):
        row_power = params.sigma_s2 * (np.abs(p_tilde_prev) ** 2).sum(axis=1)
        trace_term = float(m_diag @ row_power)  # tr(M P C_s P^H)
        f2 = f_prev * f_prev
        f_diag = gamma_reg * f2 * (params.e_tr * m_diag - f2 * trace_term) / (
            params.rho_f * params.e_tr
        )
        diag = diag + f_diag
        if events is not None and np.any(f_diag <= 0.0):
            events["loading_diag_nonpositive"] = events.get(
                "loading_diag_nonpositive", 0) + 1
    a = gram + np.diag(diag)
    if events is not None and np.any(np.real(np.diagonal(a)) <= 0.0):
        events["gram_nonpositive_diag"] = events.get("gram_nonpositive_diag", 0) + 1
    try:
        return numerics.hermitian_solve(a, g_hat.conj())
    except IllConditioned as exc:
        raise SingularSystem(
            f"regularized Gram matrix singular (cond {exc.cond_estimate:.3e})"
        ) from exc


def mmse_precoder(g_hat, params):
    """MMSE inner precoder: the robust step with zero regularization."""
    p_tilde = rmmse_step(g_hat, None, 0.0, 1.0, None, params)
    return PrecoderResult(p_tilde=p_tilde, kind="MMSE", gamma_reg=0.0,
                          f=normalization_f(p_tilde, params.sigma_s2, params.e_tr))


def gamma_candidates(base_grid, m_diag, f_prev, params):
    """Scale the dimensionless grid to the loading term's natural magnitude.

    At gamma = rho_f / f_prev^2 the diagonal correction has the same scale
    as the CSI-error moment diagonal itself, which is where loading starts
    to reshape the Gram matrix; the grid spans three decades below that.
    """
    if not np.any(m_diag != 0.0):
        return [0.0]
    scale = params.rho_f / (f_prev * f_prev)
    cands = sorted({float(b) * scale for b in base_grid if b != 0.0})
    return [0.0] + cands


def rmmse_iterate(g_hat, beta, n, params, iters_prec=2,
                  gamma_base_grid=GAMMA_BASE_GRID, theta=THETA_DEFAULT,
                  events=None):
    """Iterative robust precoder: pick the regularization weight per
    iteration by scoring the minimum per-user SINR under uniform power,
    then refresh (P_tilde, f) through the closed-form step.

    Seeded at the MMSE solution; the zero weight is always a candidate, so
    the selected precoder never scores below MMSE on the same realization.
    """
    from . import power_alloc  # deferred: power_alloc imports this module

    mmse = mmse_precoder(g_hat, params)
    m_diag = loading_matrix(beta, n, theta)
    f_prev, pt_prev = mmse.f, mmse.p_tilde
    gamma_sel = 0.0

    def min_sinr_upa(p_tilde, f):
        p = (f / np.sqrt(params.rho_f)) * p_tilde
        model = power_alloc.sinr_model(g_hat, p, beta, n, params.rho_f,
                                       params.sigma_w2)
        pc = power_alloc.upa(model)
        return float(power_alloc.sinr(pc.eta, model).min())

    for _ in range(iters_prec):
        best = None
        for gamma in gamma_candidates(gamma_base_grid, m_diag, f_prev, params):
            try:
                pt_c = rmmse_step(g_hat, m_diag, gamma, f_prev, pt_prev,
                                  params, events)
                f_c = normalization_f(pt_c, params.sigma_s2, params.e_tr)
                score = min_sinr_upa(pt_c, f_c)
            except (SingularSystem, SolverFailure, ZeroPrecoder):
                if events is not None:
                    events["gamma_candidate_failed"] = events.get(
                        "gamma_candidate_failed", 0) + 1
                continue
            if best is None or score > best[0]:
                best = (score, gamma, pt_c, f_c)
        if best is None:
            if events is not None:
                events["gamma_fallback"] = events.get("gamma_fallback", 0) + 1
            best = (0.0, 0.0, mmse.p_tilde, mmse.f)
        _, gamma_sel, pt_prev, f_prev = best

    return PrecoderResult(p_tilde=pt_prev, f=f_prev, kind="RMMSE",
                          gamma_reg=gamma_sel, theta=theta)


def assemble_precoder(p_tilde, f, params, eta):
    """Physical precoder P = (f / sqrt(rho_f)) * P_tilde * diag(1/sqrt(eta))."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= 0.0):
        raise ZeroPowerEntry("power coefficients must be strictly positive")
    return (f / np.sqrt(params.rho_f)) * p_tilde / np.sqrt(eta)[None, :]
