"""Network geometry, large-scale fading and the statistical CSI split.

Large-scale coefficients follow a three-slope path-loss model with
log-normal shadowing beyond the second breakpoint. The channel between AP m
and user u is g = sqrt(beta) * h with h ~ CN(0,1); the CSI estimate and
error are drawn independently as CN(0, n*beta) and CN(0, (1-n)*beta) so the
true channel is their sum.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Geometry:
    ap_positions: np.ndarray  # (M, 2) meters
    user_positions: np.ndarray  # (U, 2) meters
    area_side: float


@dataclass(frozen=True)
class LargeScale:
    beta: np.ndarray  # (M, U) linear scale
    distances: np.ndarray  # (M, U) meters


@dataclass(frozen=True)
class ChannelSet:
    g_true: np.ndarray  # (M, U) complex
    g_hat: np.ndarray  # (M, U) complex CSI estimate
    g_err: np.ndarray  # (M, U) complex CSI error
    beta: LargeScale
    n: float  # CSI-quality fraction in [0, 1]


def place_nodes(m_aps, u_users, area_side, rng):
    """Drop APs and users i.i.d. uniform on the square [0, area_side]^2."""
    ap = rng.uniform(0.0, area_side, size=(m_aps, 2))
    users = rng.uniform(0.0, area_side, size=(u_users, 2))
    return Geometry(ap_positions=ap, user_positions=users, area_side=float(area_side))


def path_loss_constant(carrier_mhz, h_ap, h_user):
    """Hata-style fixed attenuation L in dB for the three-slope model."""
    lf = np.log10(carrier_mhz)
    return (
        46.3
        + 33.9 * lf
        - 13.82 * np.log10(h_ap)
        - (1.1 * lf - 0.7) * h_user
        + (1.56 * lf - 0.8)
    )

def path_loss_db(d, l_const, d0, d1):
    """Three-slope path loss in dB; d may be scalar or array.

    Beyond d1 the slope is 35 dB/decade (branch condition d > d1 is strict);
    between d0 and d1 it is 20 dB/decade with a d1-anchored offset; at or
    below d0 the value floors (this also covers d = 0).
    """
    d = np.asarray(d, dtype=float)
    mid_offset = -l_const - 15.0 * np.log10(d1)
    with np.errstate(divide="ignore"):
        far = -l_const - 35.0 * np.log10(np.maximum(d, 1e-300))
        mid = mid_offset - 20.0 * np.log10(np.maximum(d, 1e-300))
    floor = mid_offset - 20.0 * np.log10(d0)
    out = np.where(d > d1, far, np.where(d > d0, mid, floor))
    return out if out.ndim else float(out)


def large_scale_fading(geom, sigma_sh_db, rng, *, carrier_mhz=1900.0,
                       h_ap=15.0, h_user=1.65, d0=10.0, d1=50.0):
    """Draw beta = pathloss * shadowing for every AP-user link.

    Shadowing z ~ N(0,1) scaled by sigma_sh_db applies only to links with
    d > d1; the z draw happens for every link regardless so the stream
    layout does not depend on the geometry.
    """
    diff = geom.ap_positions[:, None, :] - geom.user_positions[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    l_const = path_loss_constant(carrier_mhz, h_ap, h_user)
    upsilon_db = path_loss_db(dist, l_const, d0, d1)
    z = rng.standard_normal(dist.shape)
    shadow_db = np.where(dist > d1, sigma_sh_db * z, 0.0)
    beta = 10.0 ** ((upsilon_db + shadow_db) / 10.0)
    return LargeScale(beta=beta, distances=dist)


def channel_set_from_normals(ls, n, z_hat, z_err):
    """Build the CSI split from externally supplied CN(0,1) matrices.

    Sharing (z_hat, z_err) across several n values yields paired channel
    sets, which keeps comparisons at different CSI qualities low-variance.
    """
    if not 0.0 <= n <= 1.0:
        raise ValueError(f"CSI fraction n={n} outside [0, 1]")
    g_hat = np.sqrt(n * ls.beta) * z_hat
    g_err = np.sqrt((1.0 - n) * ls.beta) * z_err
    return ChannelSet(g_true=g_hat + g_err, g_hat=g_hat, g_err=g_err,
                      beta=ls, n=float(n))


def complex_normals(shape, rng):
    """CN(0,1) i.i.d. matrix."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channel_set(ls, n, rng):
    """Draw the CSI estimate and error independently; the true channel is the sum."""
    shape = ls.beta.shape
    z_hat = complex_normals(shape, rng)
    z_err = complex_normals(shape, rng)
    return channel_set_from_normals(ls, n, z_hat, z_err)
