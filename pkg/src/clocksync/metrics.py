"""Observables: synchronization degree, tick statistics, spectra, transients.

All metrics are pure functions over immutable series.  Ensemble
reductions accumulate in trajectory order (plain sums over the member
axis), so results are reproducible bit-for-bit for a fixed ensemble.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal
from scipy.ndimage import median_filter

from .errors import ConstantSeriesError, EnsembleError, PlateauError
from .model import PhysicalParams, sideband_weight
from .trajectory import Trajectory

# Ticks are only trusted while the envelope has healthy amplitude: below
# ~10% of rms the per-period phase error grows like 1/|b| and its heavy
# tail would dominate (and destabilize) the period-variance estimate.
# The floor trims a fixed ~1% of periods at every operating point.
MAGNITUDE_FLOOR_FRACTION = 0.1
MIN_FLUX_ENSEMBLE = 50


@dataclass(frozen=True)
class TickSeries:
    """Tick instants of one clock and the periods between them.

    gaps lists (start, end) times of intervals where the envelope
    magnitude fell below the phase-definition floor; ticks there are kept
    but flagged rather than silently dropped.
    """

    tick_times: np.ndarray
    periods: np.ndarray
    gaps: tuple

    def __post_init__(self):
        if len(self.tick_times) >= 2 and np.min(self.periods) <= 0:
            raise ValueError("tick times must be strictly increasing")


@dataclass(frozen=True)
class SyncMetrics:
    """Degree of synchronization C, deviation D, single-clock accuracies."""

    C: float
    D: float
    N1: float
    N2: float


@dataclass(frozen=True)
class TransientResult:
    """Quench-ensemble observables: R(t), per-bath fluxes, transient time."""

    times: np.ndarray
    R: np.ndarray
    mu_b1_t: np.ndarray
    mu_b2_t: np.ndarray
    mu_a_t: np.ndarray
    transient_time: float


def pearson_sync_degree(x1, x2) -> float:
    """Pearson correlation of two displacement records, means removed.

    Raises ConstantSeriesError if either series has zero variance.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape or x1.ndim != 1 or len(x1) < 2:
        raise ValueError("inputs must be equal-length 1-d series of length >= 2")
    d1 = x1 - x1.mean()
    d2 = x2 - x2.mean()
    v1 = float(d1 @ d1)
    v2 = float(d2 @ d2)
    if v1 == 0.0 or v2 == 0.0:
        raise ConstantSeriesError("correlation of a constant series is undefined")
    return float(np.clip((d1 @ d2) / math.sqrt(v1 * v2), -1.0, 1.0))


def extract_ticks(traj: Trajectory, clock: int) -> TickSeries:
    """Tick instants of one clock from its envelope record.

    A tick is a crossing of the unwrapped oscillator phase
    phi(t) = reference_frequency * t - arg b(t) through a multiple of
    2*pi (equivalent to one carrier cycle of the displacement), linearly
    interpolated between samples.  Requires a record long enough for at
    least 10 ticks.
    """
    b = {1: traj.b1, 2: traj.b2}[clock]
    t = traj.times
    mag = np.abs(b)
    floor = MAGNITUDE_FLOOR_FRACTION * np.sqrt(np.mean(mag ** 2))
    low = mag < floor
    gaps = []
    if np.any(low):
        # contiguous low-magnitude runs -> flagged (t_start, t_end) pairs
        runs = np.flatnonzero(low)
        splits = np.split(runs, np.flatnonzero(np.diff(runs) > 1) + 1)
        gaps = [(t[s[0]], t[s[-1]]) for s in splits if len(s)]

    phase = traj.reference_frequency * t - np.unwrap(np.angle(b))
    dphi = np.diff(phase)
    if np.median(dphi) <= 0:
        raise ValueError(
            "oscillator phase is not advancing; envelope evolves faster "
            "than the carrier, tick extraction is ill-defined")
    slips = np.flatnonzero(dphi <= 0)
    if len(slips):
        # isolated phase slips (envelope swung past the origin): flag the
        # affected intervals as gaps, then clamp so crossings stay defined
        runs = np.split(slips, np.flatnonzero(np.diff(slips) > 1) + 1)
        gaps.extend((t[r[0]], t[r[-1] + 1]) for r in runs if len(r))
        gaps.sort()
        phase = np.maximum.accumulate(phase)
    m0 = math.floor(phase[0] / (2 * np.pi)) + 1  # first crossing after t=0
    m1 = math.floor(phase[-1] / (2 * np.pi))
    if m1 - m0 + 1 < 10:
        raise ValueError("trajectory too short: fewer than 10 ticks")
    targets = 2 * np.pi * np.arange(m0, m1 + 1)
    hi = np.searchsorted(phase, targets)
    hi = np.clip(hi, 1, len(phase) - 1)
    lo = hi - 1
    span = phase[hi] - phase[lo]
    frac = np.divide(targets - phase[lo], span, where=span > 0,
                     out=np.zeros_like(span))
    ticks = t[lo] + frac * (t[hi] - t[lo])
    return TickSeries(tick_times=ticks, periods=np.diff(ticks),
                      gaps=tuple(gaps))


def _clean_periods(ticks: TickSeries) -> np.ndarray:
    """Periods not overlapping a flagged gap (phase-undefined stretch)."""
    if not ticks.gaps:
        return ticks.periods
    keep = np.ones(len(ticks.periods), dtype=bool)
    starts, ends = ticks.tick_times[:-1], ticks.tick_times[1:]
    for g0, g1 in ticks.gaps:
        keep &= (ends < g0) | (starts > g1)
    return ticks.periods[keep]


def clock_stats(ticks1: TickSeries, ticks2: TickSeries) -> SyncMetrics:
    """Deviation D and accuracies N from two tick trains.

    Periods are paired by index, each train counted from its own first
    tick.  tau_k is the accumulated period difference (the offset of the
    two clock readings after k ticks); per-period white jitter is common
    to both definitions, but only the accumulated form captures the
    frequency-mismatch ramp that dominates unsynchronized clocks and
    collapses once both clocks follow the long-lived normal mode.
    D = var(tau)/mean((t1+t2)/2)^2 and N_i = mean(t_i)^2/var(t_i); zero
    period variance yields the +inf sentinel for N (noiseless clock).
    Periods overlapping flagged gaps are excluded from the N variances
    (the phase there is undefined); the accumulated tau keeps the full
    train so clock offsets stay continuous.  C is not derivable from
    tick trains and is reported as nan here; callers combine it in.
    """
    p1, p2 = ticks1.periods, ticks2.periods
    n = min(len(p1), len(p2))
    if n < 10:
        raise ValueError("need at least 10 periods per clock")
    tau = np.cumsum(p2[:n] - p1[:n])
    mean_period = float(np.mean(0.5 * (p1[:n] + p2[:n])))
    D = float(np.var(tau, ddof=1)) / mean_period ** 2

    def accuracy(p):
        if len(p) < 10:
            return math.nan
        v = float(np.var(p, ddof=1))
        return math.inf if v == 0.0 else float(np.mean(p)) ** 2 / v

    return SyncMetrics(C=math.nan, D=D, N1=accuracy(_clean_periods(ticks1)),
                       N2=accuracy(_clean_periods(ticks2)))


def power_spectrum(x, dt: float, nperseg: int | None = None):
    """Welch PSD (Hann window, 50% overlap, density normalization).

    Real input gives a one-sided spectrum; complex input (envelopes) a
    two-sided one with frequencies relative to the carrier, sorted
    ascending.  For broadband signals sum(psd)*df reproduces the series
    variance; line features narrower than a bin are resolution limited.
    """
    x = np.asarray(x)
    n = len(x)
    if nperseg is None:
        nperseg = 2 ** int(np.log2(max(n // 8, 2)))
    if n < 2 * nperseg:
        raise ValueError("series shorter than two Welch segments")
    onesided = not np.iscomplexobj(x)
    freqs, psd = signal.welch(x, fs=1.0 / dt, window="hann", nperseg=nperseg,
                              noverlap=nperseg // 2, detrend="constant",
                              return_onesided=onesided, scaling="density")
    if not onesided:
        order = np.argsort(freqs)
        freqs, psd = freqs[order], psd[order]
    return freqs, psd


def _ensemble_blocks(ensemble: list[Trajectory]):
    if len(ensemble) < 2:
        raise EnsembleError("need at least 2 trajectories")
    t0 = ensemble[0].times
    for tr in ensemble[1:]:
        if tr.times.shape != t0.shape or not np.allclose(tr.times, t0):
            raise EnsembleError("trajectories must share a common time grid")
    b1 = np.stack([tr.b1 for tr in ensemble])
    b2 = np.stack([tr.b2 for tr in ensemble])
    return t0, b1 - b1.mean(axis=0), b2 - b2.mean(axis=0)


def transient_correlation(ensemble: list[Trajectory]):
    """Across-ensemble correlation R(t) of the two clocks.

    Carrier-cycle-averaged form of sum_j dx1_j dx2_j / sqrt(sum dx1^2
    sum dx2^2): R(t) = Re sum_j db1 db2* / sqrt(sum|db1|^2 sum|db2|^2),
    with across-ensemble means removed at each t.  Points where either
    variance vanishes are flagged as nan.
    """
    t, d1, d2 = _ensemble_blocks(ensemble)
    num = np.real(np.sum(d1 * np.conj(d2), axis=0))
    v1 = np.sum(np.abs(d1) ** 2, axis=0)
    v2 = np.sum(np.abs(d2) ** 2, axis=0)
    denom = np.sqrt(v1 * v2)
    with np.errstate(invalid="ignore", divide="ignore"):
        R = np.where(denom > 0, num / denom, np.nan)
    return t, np.clip(R, -1.0, 1.0)


def transient_time(times, R, smooth_frac: float = 0.05, level: float = 0.95,
                   plateau_frac: float = 0.2, plateau_tol: float = 0.1) -> float:
    """First time the smoothed R reaches ``level`` of its maximum.

    R is smoothed with a moving median of width smooth_frac * len(R).
    The last plateau_frac of the window must be stationary (spread below
    plateau_tol of the overall range), otherwise PlateauError suggests a
    longer window.  The crossing is linearly interpolated.
    """
    times = np.asarray(times, dtype=float)
    R = np.asarray(R, dtype=float)
    if len(R) != len(times) or len(R) < 10:
        raise ValueError("need matching series of length >= 10")
    w = max(1, int(round(smooth_frac * len(R))))
    smoothed = median_filter(R, size=w, mode="nearest") if w > 1 else R

    tail = smoothed[int((1.0 - plateau_frac) * len(R)):]
    span = smoothed.max() - smoothed.min()
    if span > 0 and (tail.max() - tail.min()) > plateau_tol * span:
        raise PlateauError(
            "no plateau in the last "
            f"{plateau_frac:.0%} of the window; use a longer record")

    target = level * smoothed.max()
    idx = int(np.argmax(smoothed >= target))
    if idx == 0:
        return float(times[0])
    lo, hi = smoothed[idx - 1], smoothed[idx]
    frac = 0.0 if hi == lo else (target - lo) / (hi - lo)
    return float(times[idx - 1] + frac * (times[idx] - times[idx - 1]))


def transient_entropy_flux(ensemble: list[Trajectory], params: PhysicalParams):
    """Instantaneous per-bath flux estimates from ensemble second moments.

    At each time the effective occupations n_bi(t) + 1/2 = <|db_i|^2>,
    n_cross(t) = Re<db1 db2*> feed the NESS flux expressions (thermal
    ratio terms for the clocks, adiabatic transduction for the photons).
    Requires >= 50 members for usable error bars.
    """
    if len(ensemble) < MIN_FLUX_ENSEMBLE:
        raise EnsembleError(
            f"need at least {MIN_FLUX_ENSEMBLE} trajectories, "
            f"got {len(ensemble)}")
    _, d1, d2 = _ensemble_blocks(ensemble)
    n1 = np.mean(np.abs(d1) ** 2, axis=0) - 0.5
    n2 = np.mean(np.abs(d2) ** 2, axis=0) - 0.5
    ncr = np.real(np.mean(d1 * np.conj(d2), axis=0))
    mu1 = params.gamma1 * ((n1 + 0.5) / (params.nth1 + 0.5) - 1.0)
    mu2 = params.gamma2 * ((n2 + 0.5) / (params.nth2 + 0.5) - 1.0)
    na = sideband_weight(params) * (params.G1 ** 2 * n1 + params.G2 ** 2 * n2
                                    + 2.0 * params.G1 * params.G2 * ncr)
    mua = 2.0 * params.kappa * na
    return mu1, mu2, mua
