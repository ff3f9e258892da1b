"""Stochastic trajectories of the reduced (rotating-frame) model.

All time stepping happens in the two-mode envelope picture: the rates
there are at most a few kHz, so microsecond steps suffice, versus the
~10 ns the cavity-resolved model would need.  The full 6x6 model is only
ever exercised through Lyapunov algebra, never time stepped.

Two integrators share one propagation engine, differing only in the
one-step map (F, S) with update  z <- F z + S zeta:

* Euler-Maruyama (``simulate``): F = I + A dt, S = sqrt(dt) chol(D).
  First-order; per-step validation rejects steps that would make the
  discrete map expansive.
* Exact OU discretization (``propagate_exact``): F = expm(A dt),
  S S^H = V_inf - F V_inf F^H.  Statistically exact for any dt and
  unconditionally stable; production sweeps use this path.

Before stepping, the common rotation of the drift (frequency mismatch
midpoint plus optical-spring shift) is moved into the carrier, so the
integrated envelopes are as slow as possible; the carrier actually used
is recorded as ``Trajectory.reference_frequency``.

Reproducibility: trajectory i of an ensemble with master seed m draws
from a Philox counter-based generator keyed with m * 2^64 + i.  Each
stream first yields 4 standard normals for the initial condition, then
4 per step (real/imaginary pairs for the two modes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import FrameMismatchError, StabilityError, TimestepError
from .model import FRAME_REDUCED, LinearDynamics
from .steadystate import solve_lyapunov

DEFAULT_DT = 1e-5
DEFAULT_DURATION = 10.0
_SPECTRAL_DT_FACTOR = 0.05
_NOISE_BUFFER_BYTES = 2e8


@dataclass(frozen=True)
class Trajectory:
    """One realization of the two envelope processes.

    times is the uniform sample grid (s), dt its step; b1, b2 are the
    complex envelopes.  The displacement of clock i is
    x_i(t) = sqrt(2) Re[b_i(t) exp(-i reference_frequency t)].
    """

    times: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    dt: float
    frame: str
    reference_frequency: float
    seed: int


def displacements(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Reconstruct the displacement records x1(t), x2(t)."""
    phase = np.exp(-1j * traj.reference_frequency * traj.times)
    x1 = np.sqrt(2.0) * np.real(traj.b1 * phase)
    x2 = np.sqrt(2.0) * np.real(traj.b2 * phase)
    return x1, x2


def _require_reduced(dyn: LinearDynamics):
    if dyn.frame != FRAME_REDUCED:
        raise FrameMismatchError(
            "time stepping is only supported for reduced-rotating dynamics")


def _recentered(dyn: LinearDynamics) -> tuple[np.ndarray, float]:
    """Shift the common rotation into the carrier.

    Returns (drift', carrier) with drift' = drift + i c I and
    carrier = reference_frequency + c, c = Re(tr(i drift))/2.
    """
    c = float(np.real(np.trace(1j * dyn.drift)) / 2.0)
    drift = dyn.drift + 1j * c * np.eye(2)
    return drift, dyn.reference_frequency + c


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    """Hermitian PSD square root via eigh; tiny negative eigs clipped."""
    w, U = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    floor = -1e-10 * max(np.max(np.abs(w)), 1.0)
    if np.min(w) < floor:
        raise ValueError(f"matrix is not PSD (min eig {np.min(w):.3e})")
    return U * np.sqrt(np.clip(w, 0.0, None))


def _check_stability(drift: np.ndarray):
    ev = np.linalg.eigvals(drift)
    if np.max(ev.real) >= 0:
        raise StabilityError(
            f"drift is not stable: max Re(eig) = {np.max(ev.real):.3e}")
    return ev


def _check_dt_euler(dyn: LinearDynamics, drift_r: np.ndarray, dt: float):
    """Validate dt against the spectral rule and discrete-map stability."""
    ev_raw = np.linalg.eigvals(dyn.drift)
    spectral = _SPECTRAL_DT_FACTOR / np.max(np.abs(ev_raw))
    ev = np.linalg.eigvals(drift_r)
    # |1 + lam dt| <= 1  <=>  dt <= -2 Re(lam)/|lam|^2 for each mode
    stab = np.min(-2.0 * ev.real / np.abs(ev) ** 2)
    limit = min(spectral, stab)
    if dt > limit:
        raise TimestepError(
            f"dt = {dt:.3e} s too large for Euler-Maruyama "
            f"(limit {limit:.3e} s); suggested dt = {0.5 * limit:.3e} s",
            suggested_dt=0.5 * limit)


def _rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def derived_seed(master_seed: int, index: int) -> int:
    """Per-trajectory Philox key: master_seed * 2^64 + index."""
    if not 0 <= master_seed < 2 ** 64:
        raise ValueError("master seed must fit in 64 bits")
    return (int(master_seed) << 64) + int(index)


def _thermal_initial(dyn: LinearDynamics, rng: np.random.Generator) -> np.ndarray:
    """Draw b(0) from the uncoupled thermal ensemble (4 normals)."""
    z = rng.standard_normal(4)
    p = dyn.params
    s1 = np.sqrt(0.5 * (p.nth1 + 0.5))
    s2 = np.sqrt(0.5 * (p.nth2 + 0.5))
    return np.array([s1 * (z[0] + 1j * z[1]), s2 * (z[2] + 1j * z[3])])


def _gaussian_initial(L: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw b(0) with covariance L L^H (4 normals)."""
    z = rng.standard_normal(4)
    zeta = np.array([z[0] + 1j * z[1], z[2] + 1j * z[3]]) / np.sqrt(2.0)
    return L @ zeta


def _iterate_blocks(F: np.ndarray, S: np.ndarray, z0: np.ndarray,
                    n_steps: int, rngs: list):
    """Propagate z <- F z + S zeta, yielding blocks of states.

    F and S are either shared (2, 2) maps or per-batch-member stacks
    (B, 2, 2).  Noise is drawn per trajectory in step chunks; chunked
    draws from one generator are bit-identical to a single large draw,
    so results do not depend on the chunk size (only on each
    trajectory's own stream).  Yields (first_step_index, states) with
    states of shape (B, m, 2) covering steps first..first+m-1 (state
    AFTER each step; the initial state is not yielded).
    """
    B = len(rngs)
    z = np.array(z0, dtype=complex).reshape(B, 2).copy()
    stacked = F.ndim == 3
    Ft = np.ascontiguousarray(np.swapaxes(F, -1, -2))
    St = np.ascontiguousarray(np.swapaxes(S, -1, -2))
    chunk = max(1, int(_NOISE_BUFFER_BYTES / (B * 4 * 8)))
    k = 0
    while k < n_steps:
        m = min(chunk, n_steps - k)
        noise = np.empty((B, m, 4))
        for b, rng in enumerate(rngs):
            noise[b] = rng.standard_normal((m, 4))
        zeta = (noise[..., 0::2] + 1j * noise[..., 1::2]) / np.sqrt(2.0)
        xi = zeta @ St  # (B, m, 2) for shared or stacked maps alike
        block = np.empty((B, m, 2), dtype=complex)
        if stacked:
            zc = z[:, None, :]
            for j in range(m):
                zc = zc @ Ft
                zc += xi[:, j:j + 1]
                block[:, j] = zc[:, 0]
            z = zc[:, 0]
        else:
            for j in range(m):
                z = z @ Ft + xi[:, j]
                block[:, j] = z
        if not np.all(np.isfinite(z)):
            raise StabilityError("trajectory diverged (non-finite samples)")
        yield k, block
        k += m


def _run_stream(F: np.ndarray, S: np.ndarray, z0: np.ndarray, n_steps: int,
                rngs: list, store_every: int) -> np.ndarray:
    """Propagate and store every store_every-th state (plus the initial)."""
    B = len(rngs)
    n_stored = n_steps // store_every + 1
    out = np.empty((B, n_stored, 2), dtype=complex)
    out[:, 0] = np.array(z0, dtype=complex).reshape(B, 2)
    for k0, block in _iterate_blocks(F, S, z0, n_steps, rngs):
        m = block.shape[1]
        # global step indices k0+1 .. k0+m; keep multiples of store_every
        first = (k0 // store_every + 1) * store_every
        keep = np.arange(first, k0 + m + 1, store_every)
        if len(keep):
            out[:, keep // store_every] = block[:, keep - k0 - 1]
    return out


def _build_euler_map(dyn: LinearDynamics, dt: float):
    drift_r, carrier = _recentered(dyn)
    _check_stability(drift_r)
    _check_dt_euler(dyn, drift_r, dt)
    F = np.eye(2, dtype=complex) + drift_r * dt
    S = np.sqrt(dt) * _psd_sqrt(dyn.diffusion)
    return F, S, carrier


def _build_exact_map(dyn: LinearDynamics, dt: float):
    drift_r, carrier = _recentered(dyn)
    _check_stability(drift_r)
    # V_inf is invariant under the recentering (i c I drops from A V + V A^H)
    Vinf = solve_lyapunov(drift_r, dyn.diffusion)
    F = sla.expm(drift_r * dt)
    Q = Vinf - F @ Vinf @ F.conj().T
    S = _psd_sqrt(Q)
    return F, S, carrier


def _finish(dyn, carrier, dt, store_every, seed, series) -> Trajectory:
    n_stored = series.shape[0]
    dt_s = dt * store_every
    times = dt_s * np.arange(n_stored)
    return Trajectory(times=times, b1=series[:, 0].copy(),
                      b2=series[:, 1].copy(), dt=dt_s, frame=dyn.frame,
                      reference_frequency=carrier, seed=seed)


def simulate(dyn: LinearDynamics, duration: float, dt: float = DEFAULT_DT,
             seed: int = 0, initial_state=None, store_every: int = 1) -> Trajectory:
    """Euler-Maruyama integration of the reduced Langevin dynamics.

    Deterministic given (seed, dt, duration).  The initial condition is
    sampled from the uncoupled thermal distribution unless overridden
    (an override consumes no random numbers).

    Raises TimestepError (with a suggested dt) if the step fails either
    the spectral-radius rule dt <= 0.05/max|eig| or the discrete
    stability bound of the Euler map.
    """
    _require_reduced(dyn)
    F, S, carrier = _build_euler_map(dyn, dt)
    n_steps = int(round(duration / dt))
    rng = _rng_for(seed)
    if initial_state is None:
        z0 = _thermal_initial(dyn, rng)
    else:
        z0 = np.asarray(initial_state, dtype=complex)
    out = _run_stream(F, S, z0[None, :], n_steps, [rng], store_every)
    return _finish(dyn, carrier, dt, store_every, seed, out[0])


def propagate_exact(dyn: LinearDynamics, duration: float, dt: float = DEFAULT_DT,
                    seed: int = 0, initial_state=None,
                    store_every: int = 1) -> Trajectory:
    """Exact discrete-time OU update, statistically exact for any dt.

    state <- expm(A dt) state + xi with cov(xi) = V_inf - F V_inf F^H.
    With zero diffusion this reduces to the matrix-exponential flow.
    """
    _require_reduced(dyn)
    F, S, carrier = _build_exact_map(dyn, dt)
    n_steps = int(round(duration / dt))
    rng = _rng_for(seed)
    if initial_state is None:
        z0 = _thermal_initial(dyn, rng)
    else:
        z0 = np.asarray(initial_state, dtype=complex)
    out = _run_stream(F, S, z0[None, :], n_steps, [rng], store_every)
    return _finish(dyn, carrier, dt, store_every, seed, out[0])


def run_ensemble(dyn: LinearDynamics, n_traj: int, duration: float,
                 dt: float = DEFAULT_DT, master_seed: int = 0,
                 quench: bool = True, integrator: str = "exact",
                 store_every: int = 1) -> list[Trajectory]:
    """Seeded ensemble of independent trajectories, ordered by index.

    With ``quench`` (the default protocol) initial states are drawn from
    the uncoupled (G = 0) thermal ensemble and evolved under the coupled
    drift from t = 0; with ``quench=False`` they are drawn from the NESS
    of the coupled dynamics instead.  Trajectory i uses the derived seed
    master_seed * 2^64 + i, so ``run_ensemble(..., n_traj=1)`` is
    bit-identical to the single-trajectory integrator called with that
    derived seed.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    _require_reduced(dyn)
    if integrator == "euler":
        F, S, carrier = _build_euler_map(dyn, dt)
    elif integrator == "exact":
        F, S, carrier = _build_exact_map(dyn, dt)
    else:
        raise ValueError(f"unknown integrator {integrator!r}")

    n_steps = int(round(duration / dt))
    seeds = [derived_seed(master_seed, i) for i in range(n_traj)]
    rngs = [_rng_for(s) for s in seeds]
    if quench:
        z0 = np.stack([_thermal_initial(dyn, r) for r in rngs])
    else:
        drift_r, _ = _recentered(dyn)
        L = _psd_sqrt(solve_lyapunov(drift_r, dyn.diffusion))
        z0 = np.stack([_gaussian_initial(L, r) for r in rngs])
    out = _run_stream(F, S, z0, n_steps, rngs, store_every)
    return [_finish(dyn, carrier, dt, store_every, seeds[i], out[i])
            for i in range(n_traj)]
