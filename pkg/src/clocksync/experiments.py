"""Coupling sweeps and quench protocols: thresholds, turning points, transients.

The sweep computes every quantity twice where possible: an analytic path
(normal modes, Lyapunov NESS, entropy rates) that is noise free and
fast, and a Monte Carlo path (one long trajectory per grid point) that
exercises the full simulation pipeline.  Threshold detection runs on the
analytic degree of synchronization; the Monte Carlo estimates validate it.

Monte Carlo sweeps and quench ensembles use the exact OU discretization:
at the default 10 us step the Euler map is expansive once the optical
spring splits the envelope frequencies by a few kHz (|G|/kappa above
roughly 0.015), while the exact update is correct at any step.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import EnsembleError, ThresholdError, TurningPointError
from .metrics import (SyncMetrics, TransientResult, _clean_periods,
                      clock_stats, extract_ticks, pearson_sync_degree,
                      transient_correlation, transient_entropy_flux,
                      transient_time)
from .model import (FRAME_REDUCED, TWO_PI, NormalModes, PhysicalParams,
                    effective_coupling, normal_modes_closed_form,
                    reduced_drift_matrix)
from .steadystate import analytic_sync_degree, entropy_rates, steady_state
from .trajectory import (DEFAULT_DT, DEFAULT_DURATION, Trajectory,
                         derived_seed, displacements, propagate_exact,
                         run_ensemble)

DEFAULT_GRID = np.linspace(0.0, 0.05, 26)
BURN_IN_DECAY_TIMES = 5.0
THRESHOLD_LEVEL = 0.5
# Tick statistics need the carrier cycle resolved (a few samples per
# 2.5 us period), unlike covariances, and long records: the period-jitter
# variance mixes over the slow amplitude breathing of the long-lived mode
# (rate gamma_plus ~ 2pi x 10 Hz), so several hundred amplitude
# correlation times are required for a stable estimate.  All sweep points
# propagate together in one vectorized pass, processed in time chunks.
TICK_RECORD_DURATION = 6.0
TICK_RECORD_DT = 1e-6
TICK_CHUNK_SECONDS = 0.25

SWEEP_CSV_HEADER = ["g_over_kappa", "C", "D", "N1", "N2", "gamma_plus",
                    "gamma_minus", "ratio", "mu_b1", "mu_b2", "mu_a", "pi_s",
                    "analytic_C"]


@dataclass(frozen=True)
class SweepRow:
    """One sweep point; Monte Carlo fields are nan on the analytic path."""

    g_over_kappa: float
    C: float
    D: float
    N1: float
    N2: float
    gamma_plus: float
    gamma_minus: float
    ratio: float
    mu_b1: float
    mu_b2: float
    mu_a: float
    pi_s: float
    analytic_C: float

    def as_list(self):
        return [getattr(self, k) for k in SWEEP_CSV_HEADER]


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("CLOCKSYNC_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def burn_in_time(modes: NormalModes) -> float:
    """Equilibration margin: 5 decay times of the long-lived mode."""
    return BURN_IN_DECAY_TIMES / modes.gamma_plus if modes.gamma_plus > 0 else 0.0


def _discard_burn_in(traj: Trajectory, discard: float) -> Trajectory:
    keep = traj.times >= discard
    return replace(traj, times=traj.times[keep], b1=traj.b1[keep],
                   b2=traj.b2[keep])


class _TickStats:
    """Streaming period statistics for one sweep point.

    Accumulates gap-clean period moments (centered on the nominal period
    to avoid cancellation) for the accuracies, and per-window variances
    of the accumulated period difference for the deviation D.
    """

    def __init__(self, nominal_period: float):
        self.t0 = nominal_period
        self.n = np.zeros(2)
        self.s1 = np.zeros(2)
        self.s2 = np.zeros(2)
        self.d_vars = []
        self.period_sum = 0.0
        self.period_count = 0

    def update(self, chunk: Trajectory):
        ticks = [extract_ticks(chunk, 1), extract_ticks(chunk, 2)]
        for i, tk in enumerate(ticks):
            p = _clean_periods(tk) - self.t0
            self.n[i] += len(p)
            self.s1[i] += p.sum()
            self.s2[i] += (p * p).sum()
        p1, p2 = ticks[0].periods, ticks[1].periods
        m = min(len(p1), len(p2))
        tau = np.cumsum(p2[:m] - p1[:m])
        self.d_vars.append(float(np.var(tau, ddof=1)))
        self.period_sum += float(np.sum(0.5 * (p1[:m] + p2[:m])))
        self.period_count += m

    def result(self) -> tuple[float, float, float]:
        if self.period_count == 0:
            raise EnsembleError("tick record too short for statistics")
        mean_period = self.period_sum / self.period_count
        D = float(np.mean(self.d_vars)) / mean_period ** 2
        N = []
        for i in range(2):
            n = self.n[i]
            if n < 10:
                N.append(math.nan)
                continue
            var = (self.s2[i] - self.s1[i] ** 2 / n) / (n - 1)
            mean = self.t0 + self.s1[i] / n
            N.append(math.inf if var <= 0.0 else mean ** 2 / var)
        return D, N[0], N[1]


def _tick_stats_batch(params_list, master_seed: int, seed_base: int,
                      duration: float = TICK_RECORD_DURATION,
                      dt: float = TICK_RECORD_DT) -> list:
    """Fine-sampled tick statistics for many operating points at once.

    One vectorized exact-propagator pass integrates every point's
    envelope pair side by side (point j seeded with seed_base + j);
    ticks are extracted and reduced in time chunks so only a window of
    samples is ever held.  Starts from the stationary distribution of
    each point, so no burn-in is discarded.  D is therefore evaluated
    per chunk window and averaged.
    """
    from .trajectory import (_build_exact_map, _gaussian_initial, _psd_sqrt,
                             _recentered, _rng_for, _iterate_blocks)
    from .steadystate import solve_lyapunov

    B = len(params_list)
    Fs, Ss, carriers, z0 = [], [], [], []
    rngs = []
    for j, p in enumerate(params_list):
        dyn = reduced_drift_matrix(p)
        F, S, carrier = _build_exact_map(dyn, dt)
        drift_r, _ = _recentered(dyn)
        L = _psd_sqrt(solve_lyapunov(drift_r, dyn.diffusion))
        rng = _rng_for(derived_seed(master_seed, seed_base + j))
        rngs.append(rng)
        z0.append(_gaussian_initial(L, rng))
        Fs.append(F)
        Ss.append(S)
        carriers.append(carrier)
    Fs = np.stack(Fs)
    Ss = np.stack(Ss)
    z0 = np.stack(z0)

    n_steps = int(round(duration / dt))
    chunk_steps = max(int(round(TICK_CHUNK_SECONDS / dt)), 1000)
    stats = [_TickStats(TWO_PI / c) for c in carriers]

    def consume(piece):
        times = dt * np.arange(piece.shape[1])
        for j in range(B):
            stats[j].update(Trajectory(
                times=times, b1=piece[j, :, 0], b2=piece[j, :, 1],
                dt=dt, frame=FRAME_REDUCED,
                reference_frequency=carriers[j], seed=0))

    buf = np.empty((B, 0, 2), dtype=complex)
    for k0, block in _iterate_blocks(Fs, Ss, z0, n_steps, rngs):
        buf = np.concatenate([buf, block], axis=1) if buf.size else block
        while buf.shape[1] >= chunk_steps:
            piece, buf = buf[:, :chunk_steps], buf[:, chunk_steps:]
            consume(piece)
    if buf.shape[1] >= min(chunk_steps, 10000):
        consume(buf)
    return [s.result() for s in stats]


def trajectory_sync_metrics(traj: Trajectory, discard: float) -> SyncMetrics:
    """C, D, N1, N2 from one NESS trajectory after discarding burn-in."""
    sub = _discard_burn_in(traj, discard)
    x1, x2 = displacements(sub)
    C = pearson_sync_degree(x1, x2)
    stats = clock_stats(extract_ticks(sub, 1), extract_ticks(sub, 2))
    return replace(stats, C=C)


# Seed layout inside a sweep: point i draws its correlation record with
# derived seed i and its tick record with derived seed 2^32 + i.
TICK_SEED_BASE = 2 ** 32


def _sweep_point(params: PhysicalParams, g: float, protocol: str,
                 master_seed: int, duration: float, dt: float,
                 index: int) -> SweepRow:
    p = params.with_coupling(g)
    coupling = effective_coupling(p)
    modes = normal_modes_closed_form(p.delta_omega, p.gamma1, p.gamma2,
                                     coupling)
    dyn = reduced_drift_matrix(p, coupling)
    cov = steady_state(dyn)
    rates = entropy_rates(cov, p)
    c_analytic = analytic_sync_degree(cov)
    ratio = (modes.gamma_plus / modes.gamma_minus
             if modes.gamma_minus != 0 else math.nan)

    C = math.nan
    if protocol in ("monte-carlo", "both"):
        traj = propagate_exact(dyn, duration, dt,
                               seed=derived_seed(master_seed, index))
        x1, x2 = displacements(_discard_burn_in(traj, burn_in_time(modes)))
        C = pearson_sync_degree(x1, x2)

    return SweepRow(g_over_kappa=g, C=C, D=math.nan, N1=math.nan,
                    N2=math.nan, gamma_plus=modes.gamma_plus,
                    gamma_minus=modes.gamma_minus, ratio=ratio,
                    mu_b1=rates.mu_b1, mu_b2=rates.mu_b2, mu_a=rates.mu_a,
                    pi_s=rates.Pi_s, analytic_C=c_analytic)


def sweep_coupling(params: PhysicalParams, grid=None, protocol: str = "both",
                   master_seed: int = 0, duration: float = DEFAULT_DURATION,
                   dt: float = DEFAULT_DT, workers: int | None = None,
                   tick_duration: float = TICK_RECORD_DURATION) -> list[SweepRow]:
    """Sweep |G|/kappa and collect analytic and Monte Carlo observables.

    Grid points are independent; correlation records run on a small
    thread pool (capped by CLOCKSYNC_THREADS) and the fine tick records
    of all points propagate together in one vectorized pass.  Per-point
    seeds derive from (master_seed, grid index), so output is ordered by
    grid index and reproducible regardless of scheduling.
    """
    if protocol not in ("analytic", "monte-carlo", "both"):
        raise ValueError(f"unknown protocol {protocol!r}")
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    if np.any(grid < 0):
        raise ValueError("grid values must be >= 0")

    def point(i):
        return _sweep_point(params, float(grid[i]), protocol, master_seed,
                            duration, dt, i)

    if protocol == "analytic":
        return [point(i) for i in range(len(grid))]
    with ThreadPoolExecutor(max_workers=_worker_count(workers)) as pool:
        rows = list(pool.map(point, range(len(grid))))
    ticks = _tick_stats_batch([params.with_coupling(float(g)) for g in grid],
                              master_seed, TICK_SEED_BASE,
                              duration=tick_duration)
    return [replace(row, D=D, N1=N1, N2=N2)
            for row, (D, N1, N2) in zip(rows, ticks)]


def find_threshold(rows: list[SweepRow]) -> float:
    """|G_c|/kappa where the analytic C first crosses 0.5 (interpolated)."""
    g = np.array([r.g_over_kappa for r in rows])
    c = np.array([r.analytic_C for r in rows])
    above = np.flatnonzero(c >= THRESHOLD_LEVEL)
    if len(above) == 0 or above[0] == 0:
        raise ThresholdError(
            "sweep does not bracket the C = 0.5 crossing; extend the grid")
    i = above[0]
    frac = (THRESHOLD_LEVEL - c[i - 1]) / (c[i] - c[i - 1])
    return float(g[i - 1] + frac * (g[i] - g[i - 1]))


def find_turning_point(rows: list[SweepRow]) -> float:
    """|G|/kappa of the interior maximum of Pi_s (quadratic interpolation)."""
    g = np.array([r.g_over_kappa for r in rows])
    pi = np.array([r.pi_s for r in rows])
    i = int(np.argmax(pi))
    if i == 0 or i == len(rows) - 1:
        raise TurningPointError(
            "maximum of Pi_s sits on the sweep boundary; widen the range")
    x0, x1, x2 = g[i - 1], g[i], g[i + 1]
    y0, y1, y2 = pi[i - 1], pi[i], pi[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0:
        return float(x1)
    return float(x1 + 0.25 * (x2 - x0) * (y0 - y2) / denom)


def transient_experiment(params: PhysicalParams, g_over_kappa: float,
                         n_traj: int = 600, master_seed: int = 0,
                         duration: float | None = None, dt: float = DEFAULT_DT,
                         store_every: int = 1) -> TransientResult:
    """Quench protocol: switch the coupling on at t = 0 and watch R(t).

    The ensemble starts from the uncoupled thermal state.  The record
    covers both the correlation transient (set by the linewidth gap
    gamma_minus - gamma_plus) and the slow flux relaxation (set by
    gamma_plus).  The transient time is evaluated on the front segment
    of R(t) that contains the transient and its plateau, so the moving
    median window tracks the physical timescale rather than the record
    length.
    """
    if n_traj < 2:
        raise EnsembleError("transient experiment needs n_traj >= 2")
    p = params.with_coupling(g_over_kappa)
    modes = normal_modes_closed_form(p.delta_omega, p.gamma1, p.gamma2,
                                     effective_coupling(p))
    gap = modes.gamma_minus - modes.gamma_plus
    if duration is None:
        duration = max(6.0 / modes.gamma_plus,
                       120.0 / modes.gamma_minus, 0.05)
    dyn = reduced_drift_matrix(p)
    ensemble = run_ensemble(dyn, n_traj, duration, dt,
                            master_seed=master_seed, quench=True,
                            integrator="exact", store_every=store_every)
    times, R = transient_correlation(ensemble)
    window = duration if gap <= 0 else min(duration, 40.0 / gap)
    sel = times <= window
    t_tr = transient_time(times[sel], R[sel])
    mu1, mu2, mua = transient_entropy_flux(ensemble, p)
    return TransientResult(times=times, R=R, mu_b1_t=mu1, mu_b2_t=mu2,
                           mu_a_t=mua, transient_time=t_tr)
