"""Link-level Monte Carlo engine: QPSK transmission over the precoded
downlink, BER / rate / CDF aggregation, and SNR calibration.

Trials are independent tasks keyed by trial index; every random draw comes
from a SeedSequence derived from (master seed, purpose, trial, attempt), so
results are bit-identical regardless of the degree of parallelism and of
which grid points are evaluated. Within a trial the channel is drawn once
and shared across the whole SNR grid (the SNR knob only moves the transmit
power), across CSI-quality values (paired standard normals) and across
precoder/allocation series.
"""

import hashlib
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import channel, power_alloc, precoding
from .errors import (DegeneratePrecoder, IllConditioned, OddBitCount,
                     RealizationError, RedrawBudgetExceeded, SingularChannel,
                     SingularSystem, SolverFailure, ValidationError,
                     ZeroChannel, ZeroPowerEntry, ZeroPrecoder)

BOLTZMANN = 1.381e-23  # J/K

#: failures that invalidate one channel realization (redraw and count)
REALIZATION_FAILURES = (SingularChannel, SingularSystem, SolverFailure,
                        DegeneratePrecoder, ZeroPrecoder, ZeroChannel,
                        ZeroPowerEntry, IllConditioned)

MAX_REDRAW_ATTEMPTS = 4
PRECODERS = ("CB", "ZF", "MMSE", "RMMSE")
PA_SCHEMES = ("UPA", "OPA")
OUTPUT_KINDS = ("ber", "rates", "cdf")


@dataclass(frozen=True)
class Scenario:
    """Full experiment configuration; defaults follow the reference setup."""

    m_aps: int
    u_users: int
    snr_grid_db: tuple = (25.0,)
    n_values: tuple = (0.99,)
    series: tuple = (("RMMSE", "UPA"),)
    trials: int = 500
    seed: int = 1
    packet_symbols: int = 100
    modulation: str = "QPSK"
    outputs: tuple = ("ber",)
    cdf_snr_db: float = 20.0
    area_side: float = 1000.0
    iters_prec: int = 2
    iters_pa: int = 2
    gamma_grid: tuple = precoding.GAMMA_BASE_GRID
    eps_bisect: float = 1e-3
    sigma_sh_db: float = 8.0
    d0: float = 10.0
    d1: float = 50.0
    carrier_mhz: float = 1900.0
    h_ap: float = 15.0
    h_user: float = 1.65
    bandwidth_hz: float = 20e6
    noise_figure_db: float = 9.0
    temperature_k: float = 290.0
    sigma_s2: float = 1.0

    def __post_init__(self):
        if self.m_aps < 1 or self.u_users < 1:
            raise ValidationError("m_aps and u_users must be >= 1")
        if self.area_side <= 0:
            raise ValidationError("area_side must be positive")
        if not self.snr_grid_db:
            raise ValidationError("snr_grid_db must be non-empty")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if self.packet_symbols < 1:
            raise ValidationError("packet_symbols must be >= 1")
        if self.modulation != "QPSK":
            raise ValidationError(f"unsupported modulation {self.modulation!r}")
        for n in self.n_values:
            if not 0.0 <= n <= 1.0:
                raise ValidationError(f"n_csi={n} outside [0, 1]")
        if not self.series:
            raise ValidationError("at least one precoder/pa series required")
        for prec, pa in self.series:
            if prec not in PRECODERS:
                raise ValidationError(f"unknown precoder {prec!r}")
            if pa not in PA_SCHEMES:
                raise ValidationError(f"unknown pa scheme {pa!r}")
        for out in self.outputs:
            if out not in OUTPUT_KINDS:
                raise ValidationError(f"unknown output kind {out!r}")
        if self.iters_prec < 1 or self.iters_pa < 1:
            raise ValidationError("iteration counts must be >= 1")
        if self.eps_bisect <= 0:
            raise ValidationError("eps_bisect must be positive")
        if not 0 < self.d0 < self.d1:
            raise ValidationError("need 0 < d0 < d1")

    @property
    def sigma_w2(self):
        nf = 10.0 ** (self.noise_figure_db / 10.0)
        return self.temperature_k * BOLTZMANN * self.bandwidth_hz * nf


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    n: float
    precoder: str
    pa: str
    ber: float
    stderr: float
    bit_count: int
    error_count: int


@dataclass(frozen=True)
class RatePoint:
    snr_db: float
    n: float
    precoder: str
    pa: str
    sum_rate: float
    per_user: tuple


@dataclass(frozen=True)
class CdfSeries:
    precoder: str
    pa: str
    n: float
    snr_db: float
    samples: np.ndarray  # trials * U per-user rates


@dataclass
class ExperimentResult:
    ber_points: list = field(default_factory=list)
    rate_points: list = field(default_factory=list)
    cdf_series: list = field(default_factory=list)
    event_counters: Counter = field(default_factory=Counter)
    bisection_rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def snr_to_rho_f(snr_linear, g_hat, sigma_w2, u_users):
    """Invert SNR = rho_f ||G_hat||_F^2 / (U sigma_w^2) for this realization."""
    fro2 = float(np.linalg.norm(g_hat) ** 2)
    if fro2 == 0.0:
        raise ZeroChannel("channel estimate has zero norm")
    return snr_linear * u_users * sigma_w2 / fro2


def modulate_qpsk(bits):
    """Gray-mapped unit-energy QPSK; bits pair up along the last axis."""
    bits = np.asarray(bits)
    if bits.shape[-1] % 2 != 0:
        raise OddBitCount("QPSK needs an even number of bits")
    b_i = bits[..., 0::2]
    b_q = bits[..., 1::2]
    return ((1.0 - 2.0 * b_i) + 1j * (1.0 - 2.0 * b_q)) / np.sqrt(2.0)


def demodulate_qpsk(symbols):
    """Per-quadrant minimum-distance detection back to interleaved bits."""
    symbols = np.asarray(symbols)
    out = np.empty(symbols.shape[:-1] + (2 * symbols.shape[-1],), dtype=np.int64)
    out[..., 0::2] = (symbols.real < 0.0).astype(np.int64)
    out[..., 1::2] = (symbols.imag < 0.0).astype(np.int64)
    return out


def transmit_receive(chset, p, eta, s, rho_f, sigma_w2, f, rng):
    """Propagate symbols through y = sqrt(rho_f) G^T P N s + w and apply
    the receiver AGC 1/f. `s` is (U,) or (U, S)."""
    pn = p * np.sqrt(np.asarray(eta, dtype=float))[None, :]
    clean = np.sqrt(rho_f) * (chset.g_true.T @ (pn @ s))
    noise = np.sqrt(sigma_w2) * channel.complex_normals(clean.shape, rng)
    return (clean + noise) / f


def per_user_rates(pipe):
    """Achievable rates log2(1 + SINR) of the final precoder/power pairing."""
    return np.log2(1.0 + power_alloc.sinr(pipe.eta, pipe.model))


def _points(scenario):
    pts = list(scenario.snr_grid_db)
    if "cdf" in scenario.outputs and scenario.cdf_snr_db not in pts:
        pts.append(scenario.cdf_snr_db)
    return pts


def _needs_rates(scenario, snr_db):
    if "rates" in scenario.outputs and snr_db in scenario.snr_grid_db:
        return True
    return "cdf" in scenario.outputs and snr_db == scenario.cdf_snr_db


def _needs_ber(scenario, snr_db):
    return "ber" in scenario.outputs and snr_db in scenario.snr_grid_db


@dataclass
class _TrialOutput:
    errors: dict = field(default_factory=dict)  # key -> int
    bits: dict = field(default_factory=dict)
    rates: dict = field(default_factory=dict)  # key -> (U,) ndarray
    events: Counter = field(default_factory=Counter)
    trace_rows: list = field(default_factory=list)


def _run_trial(scenario, trial, collect_traces=False):
    """All series / CSI values / grid points for one channel realization."""
    last_exc = None
    for attempt in range(MAX_REDRAW_ATTEMPTS):
        try:
            out = _run_trial_attempt(scenario, trial, attempt, collect_traces)
            if attempt:
                out.events["redraws"] += attempt
            return out
        except REALIZATION_FAILURES as exc:
            last_exc = exc
    raise RealizationError(
        f"trial {trial} failed after {MAX_REDRAW_ATTEMPTS} attempts"
    ) from last_exc


def _run_trial_attempt(scenario, trial, attempt, collect_traces):
    sc = scenario
    out = _TrialOutput()
    chan_rng = np.random.default_rng(
        np.random.SeedSequence(entropy=(sc.seed, 1, trial, attempt)))
    tx_entropy = (sc.seed, 2, trial, attempt)

    geom = channel.place_nodes(sc.m_aps, sc.u_users, sc.area_side, chan_rng)
    ls = channel.large_scale_fading(
        geom, sc.sigma_sh_db, chan_rng, carrier_mhz=sc.carrier_mhz,
        h_ap=sc.h_ap, h_user=sc.h_user, d0=sc.d0, d1=sc.d1)
    z_hat = channel.complex_normals(ls.beta.shape, chan_rng)
    z_err = channel.complex_normals(ls.beta.shape, chan_rng)
    sigma_w2 = sc.sigma_w2

    for n in sc.n_values:
        chset = channel.channel_set_from_normals(ls, n, z_hat, z_err)
        for snr_db in _points(sc):
            rho_f = snr_to_rho_f(10.0 ** (snr_db / 10.0), chset.g_hat,
                                 sigma_w2, sc.u_users)
            params = precoding.PowerParams.for_network(
                rho_f, sc.m_aps, sc.u_users, sigma_w2, sc.sigma_s2)
            for prec_kind, pa_scheme in sc.series:
                trace = power_alloc.BisectionTrace() if collect_traces else None
                pipe = power_alloc.run_pipeline(
                    prec_kind, chset.g_hat, ls.beta, n, params, pa_scheme,
                    iters_prec=sc.iters_prec, iters_pa=sc.iters_pa,
                    gamma_base_grid=sc.gamma_grid, eps=sc.eps_bisect,
                    events=out.events, trace=trace)
                key = (n, snr_db, prec_kind, pa_scheme)
                if trace is not None:
                    out.trace_rows.extend(
                        (trial, n, snr_db, prec_kind, pa_scheme) + row
                        for row in trace.steps)
                if _needs_ber(sc, snr_db):
                    tx_rng = np.random.default_rng(
                        np.random.SeedSequence(entropy=tx_entropy))
                    bits = tx_rng.integers(
                        0, 2, size=(sc.u_users, 2 * sc.packet_symbols))
                    symbols = modulate_qpsk(bits)
                    received = transmit_receive(
                        chset, pipe.p, pipe.eta, symbols, rho_f, sigma_w2,
                        pipe.f, tx_rng)
                    detected = demodulate_qpsk(received)
                    out.errors[key] = int(np.count_nonzero(detected != bits))
                    out.bits[key] = bits.size
                if _needs_rates(sc, snr_db):
                    out.rates[key] = per_user_rates(pipe)
    return out


def run_experiment(scenario, threads=1, collect_traces=False):
    """Run the full grid and aggregate deterministically in trial order."""
    sc = scenario
    trials = range(sc.trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(
                lambda t: _run_trial(sc, t, collect_traces), trials))
    else:
        outputs = [_run_trial(sc, t, collect_traces) for t in trials]

    result = ExperimentResult()
    errors = Counter()
    bits = Counter()
    rate_sums = {}
    rate_samples = {}
    for out in outputs:  # trial order: reduction is deterministic
        errors.update(out.errors)
        bits.update(out.bits)
        for key, r in out.rates.items():
            if key in rate_sums:
                rate_sums[key] = rate_sums[key] + r
            else:
                rate_sums[key] = r.copy()
            rate_samples.setdefault(key, []).append(r)
        result.event_counters.update(out.events)
        result.bisection_rows.extend(out.trace_rows)

    if result.event_counters.get("redraws", 0) > 0.01 * sc.trials:
        raise RedrawBudgetExceeded(
            f"{result.event_counters['redraws']} redraws over {sc.trials} trials")

    for n in sc.n_values:
        for snr_db in sc.snr_grid_db:
            for prec_kind, pa_scheme in sc.series:
                key = (n, snr_db, prec_kind, pa_scheme)
                if _needs_ber(sc, snr_db):
                    nbits = bits[key]
                    ber = errors[key] / nbits
                    stderr = float(np.sqrt(ber * (1.0 - ber) / nbits))
                    result.ber_points.append(BerPoint(
                        snr_db=snr_db, n=n, precoder=prec_kind, pa=pa_scheme,
                        ber=ber, stderr=stderr, bit_count=nbits,
                        error_count=errors[key]))
                if "rates" in sc.outputs and snr_db in sc.snr_grid_db:
                    mean_rates = rate_sums[key] / sc.trials
                    result.rate_points.append(RatePoint(
                        snr_db=snr_db, n=n, precoder=prec_kind, pa=pa_scheme,
                        sum_rate=float(mean_rates.sum()),
                        per_user=tuple(float(r) for r in mean_rates)))
        if "cdf" in sc.outputs:
            for prec_kind, pa_scheme in sc.series:
                key = (n, sc.cdf_snr_db, prec_kind, pa_scheme)
                samples = np.concatenate(rate_samples[key])
                result.cdf_series.append(CdfSeries(
                    precoder=prec_kind, pa=pa_scheme, n=n,
                    snr_db=sc.cdf_snr_db, samples=samples))

    result.metadata = {
        "seed": sc.seed,
        "scenario_sha256": hashlib.sha256(repr(sc).encode()).hexdigest()[:12],
    }
    return result


def _single_series(scenario, snr_db, outputs):
    return replace(scenario, snr_grid_db=(snr_db,), outputs=outputs,
                   series=scenario.series[:1],
                   n_values=scenario.n_values[:1])


def run_ber_point(scenario, snr_db):
    """Aggregate BER for the scenario's first series at one SNR point."""
    res = run_experiment(_single_series(scenario, snr_db, ("ber",)))
    point = res.ber_points[0]
    return point.ber, (point.error_count, point.bit_count)


def run_rate_point(scenario, snr_db):
    """Ergodic (sum_rate, per-user rates) at one SNR point."""
    res = run_experiment(_single_series(scenario, snr_db, ("rates",)))
    point = res.rate_points[0]
    return point.sum_rate, np.asarray(point.per_user)


def run_cdf(scenario, snr_db):
    """Per-user per-realization rate samples at one SNR point."""
    sc = replace(scenario, snr_grid_db=(snr_db,), outputs=("cdf",),
                 cdf_snr_db=snr_db, series=scenario.series[:1],
                 n_values=scenario.n_values[:1])
    res = run_experiment(sc)
    return res.cdf_series[0].samples
