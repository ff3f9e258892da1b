"""Command line interface: configuration ingestion and experiment dispatch.

Subcommands: ``modes`` (normal-mode table), ``ness`` (single-point NESS
report), ``sweep`` (coupling sweep with threshold/turning-point summary),
``trajectory`` (real-time traces plus spectra), ``transient`` (quench
ensemble).  Every run writes a resolved_config.json with all defaults
actually used.  Exit codes: 0 success, 2 config errors, 3 physics or
stability errors, 4 I/O errors.

Configuration is a single JSON document (``--config``): an optional
``preset`` name plus a ``params`` object overriding individual fields.
Frequency-like fields accept either rad/s (``*_rad``) or Hz (``*_hz``,
multiplied by 2*pi on ingestion); CSV output is always SI rad/s for
rates.  Note the stored ``kappa`` is the cavity *amplitude* decay rate
(half linewidth).
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import sys

import click
import numpy as np

from . import __version__
from .errors import ClockSyncError, ConfigError
from .experiments import (SWEEP_CSV_HEADER, burn_in_time, find_threshold,
                          find_turning_point, sweep_coupling,
                          transient_experiment, trajectory_sync_metrics)
from .metrics import power_spectrum
from .model import (TWO_PI, PhysicalParams, effective_coupling,
                    normal_modes_closed_form, paper_preset,
                    reduced_drift_matrix)
from .output import ensure_dir, write_csv, write_json, write_svg
from .steadystate import analytic_sync_degree, entropy_rates, steady_state
from .trajectory import DEFAULT_DT, propagate_exact

_PRESETS = {"paper": paper_preset}

_FREQ_FIELDS = ("omega1", "omega2", "gamma1", "gamma2", "kappa", "detuning",
                "G1", "G2")
_PLAIN_FIELDS = ("nth1", "nth2", "na_in")


def _params_from_config(preset: str, config_path: str | None) -> PhysicalParams:
    base = _PRESETS.get(preset)
    if base is None:
        raise ConfigError(f"unknown preset {preset!r}; known: {sorted(_PRESETS)}")
    params = base()
    if config_path is None:
        return params

    try:
        with open(config_path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = set(doc) - {"preset", "params"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "preset" in doc:
        base = _PRESETS.get(doc["preset"])
        if base is None:
            raise ConfigError(f"unknown preset {doc['preset']!r}")
        params = base()

    overrides = {}
    for key, value in dict(doc.get("params", {})).items():
        if key in _PLAIN_FIELDS:
            overrides[key] = float(value)
        elif key.endswith("_rad") and key[:-4] in _FREQ_FIELDS:
            overrides[key[:-4]] = float(value)
        elif key.endswith("_hz") and key[:-3] in _FREQ_FIELDS:
            overrides[key[:-3]] = TWO_PI * float(value)
        else:
            raise ConfigError(
                f"unknown params key {key!r}; frequency fields take a "
                f"_rad or _hz suffix: {_FREQ_FIELDS}, plain: {_PLAIN_FIELDS}")
    try:
        return dataclasses.replace(params, **overrides)
    except ValueError as exc:
        raise ConfigError(f"invalid physical parameters: {exc}") from exc


def _echo_config(out: str, command: str, params: PhysicalParams, options: dict):
    payload = {
        "command": command,
        "version": __version__,
        "params_rad": dataclasses.asdict(params),
        "options": options,
    }
    write_json(os.path.join(out, "resolved_config.json"), payload)


def _maybe_svg(enabled: bool, csv_path: str, header, rows):
    if enabled:
        write_svg(csv_path[:-4] + ".svg", header, rows)


_shared = [
    click.option("--preset", default="paper", show_default=True,
                 help="Named parameter preset."),
    click.option("--config", "config_path", type=click.Path(exists=True),
                 default=None, help="JSON config overriding the preset."),
    click.option("--out", default="out", show_default=True,
                 help="Output directory."),
    click.option("--seed", default=0, show_default=True, type=int,
                 help="Master seed for all stochastic paths."),
    click.option("--svg", is_flag=True, help="Also write SVG quick-look plots."),
]


def shared_options(fn):
    for opt in reversed(_shared):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(__version__)
def cli():
    """Coupled stochastic-clock simulator and analysis tool."""


@cli.command()
@shared_options
@click.option("--g-max", default=0.05, show_default=True, type=float)
@click.option("--points", default=26, show_default=True, type=int)
def modes(preset, config_path, out, seed, svg, g_max, points):
    """Normal-mode table over a coupling grid."""
    params = _params_from_config(preset, config_path)
    ensure_dir(out)
    header = ["g_over_kappa", "omega_plus", "omega_minus", "gamma_plus",
              "gamma_minus", "ratio"]
    rows = []
    for g in np.linspace(0.0, g_max, points):
        p = params.with_coupling(float(g))
        nm = normal_modes_closed_form(p.delta_omega, p.gamma1, p.gamma2,
                                      effective_coupling(p))
        rows.append([g, nm.omega_plus, nm.omega_minus, nm.gamma_plus,
                     nm.gamma_minus, nm.gamma_plus / nm.gamma_minus
                     if nm.gamma_minus else math.nan])
    path = os.path.join(out, "modes.csv")
    write_csv(path, header, rows)
    _maybe_svg(svg, path, header, rows)
    _echo_config(out, "modes", params, {"g_max": g_max, "points": points,
                                        "seed": seed})
    click.echo(f"wrote {path}")


@cli.command()
@shared_options
@click.option("--g-over-kappa", default=0.02, show_default=True, type=float)
def ness(preset, config_path, out, seed, svg, g_over_kappa):
    """Single-point NESS report: occupations and entropy rates."""
    params = _params_from_config(preset, config_path).with_coupling(g_over_kappa)
    ensure_dir(out)
    dyn = reduced_drift_matrix(params)
    cov = steady_state(dyn)
    rates = entropy_rates(cov, params)
    nm = normal_modes_closed_form(params.delta_omega, params.gamma1,
                                  params.gamma2, effective_coupling(params))
    header = ["g_over_kappa", "n_b1_eff", "n_b2_eff", "n_a_eff",
              "n_cross_eff", "mu_b1", "mu_b2", "mu_a", "pi_s", "analytic_C",
              "gamma_plus", "gamma_minus"]
    row = [g_over_kappa, cov.n_b1_eff, cov.n_b2_eff, cov.n_a_eff,
           cov.n_cross_eff, rates.mu_b1, rates.mu_b2, rates.mu_a, rates.Pi_s,
           analytic_sync_degree(cov), nm.gamma_plus, nm.gamma_minus]
    path = os.path.join(out, "ness.csv")
    write_csv(path, header, [row])
    _echo_config(out, "ness", params, {"g_over_kappa": g_over_kappa,
                                       "seed": seed})
    click.echo(f"wrote {path}")


@cli.command()
@shared_options
@click.option("--g-max", default=0.05, show_default=True, type=float)
@click.option("--points", default=26, show_default=True, type=int)
@click.option("--protocol", default="both", show_default=True,
              type=click.Choice(["analytic", "monte-carlo", "both"]))
@click.option("--duration", default=10.0, show_default=True, type=float,
              help="Monte Carlo record length per point (s).")
@click.option("--dt", default=DEFAULT_DT, show_default=True, type=float)
@click.option("--tick-duration", default=6.0, show_default=True, type=float,
              help="Fine-sampled record length for tick statistics (s).")
def sweep(preset, config_path, out, seed, svg, g_max, points, protocol,
          duration, dt, tick_duration):
    """Coupling sweep: sync metrics, normal modes, entropy rates."""
    params = _params_from_config(preset, config_path)
    ensure_dir(out)
    grid = np.linspace(0.0, g_max, points)
    rows = sweep_coupling(params, grid, protocol=protocol, master_seed=seed,
                          duration=duration, dt=dt,
                          tick_duration=tick_duration)
    path = os.path.join(out, "sweep.csv")
    data = [r.as_list() for r in rows]
    write_csv(path, SWEEP_CSV_HEADER, data)
    _maybe_svg(svg, path, SWEEP_CSV_HEADER, data)

    summary = {}
    for name, fn in [("threshold_g_over_kappa", find_threshold),
                     ("turning_point_g_over_kappa", find_turning_point)]:
        try:
            summary[name] = fn(rows)
        except ClockSyncError as exc:
            summary[name] = None
            summary[name + "_error"] = str(exc)
    write_json(os.path.join(out, "sweep_summary.json"), summary)
    _echo_config(out, "sweep", params,
                 {"g_max": g_max, "points": points, "protocol": protocol,
                  "duration": duration, "dt": dt,
                  "tick_duration": tick_duration, "seed": seed})
    click.echo(f"wrote {path}")


@cli.command()
@shared_options
@click.option("--g-over-kappa", default=0.02, show_default=True, type=float)
@click.option("--duration", default=10.0, show_default=True, type=float)
@click.option("--dt", default=DEFAULT_DT, show_default=True, type=float)
@click.option("--store-every", default=1, show_default=True, type=int)
def trajectory(preset, config_path, out, seed, svg, g_over_kappa, duration,
               dt, store_every):
    """One NESS trajectory: raw envelopes, spectra, and sync metrics."""
    params = _params_from_config(preset, config_path).with_coupling(g_over_kappa)
    ensure_dir(out)
    dyn = reduced_drift_matrix(params)
    traj = propagate_exact(dyn, duration, dt, seed=seed,
                           store_every=store_every)
    header = ["t", "re_b1", "im_b1", "re_b2", "im_b2"]
    rows = np.column_stack([traj.times, traj.b1.real, traj.b1.imag,
                            traj.b2.real, traj.b2.imag])
    path = os.path.join(out, "trajectory.csv")
    write_csv(path, header, rows.tolist())

    nm = normal_modes_closed_form(params.delta_omega, params.gamma1,
                                  params.gamma2, effective_coupling(params))
    keep = traj.times >= burn_in_time(nm)
    f1, p1 = power_spectrum(traj.b1[keep], traj.dt)
    f2, p2 = power_spectrum(traj.b2[keep], traj.dt)
    carrier_hz = traj.reference_frequency / TWO_PI
    spectrum_rows = np.column_stack([carrier_hz + f1, p1, p2]).tolist()
    spectrum_header = ["f_hz", "psd_b1", "psd_b2"]
    spectrum_path = os.path.join(out, "spectrum.csv")
    write_csv(spectrum_path, spectrum_header, spectrum_rows)
    _maybe_svg(svg, spectrum_path, spectrum_header, spectrum_rows)

    m = trajectory_sync_metrics(traj, burn_in_time(nm))
    write_json(os.path.join(out, "trajectory_summary.json"),
               {"C": m.C, "D": m.D, "N1": m.N1, "N2": m.N2,
                "carrier_hz": carrier_hz})
    _echo_config(out, "trajectory", params,
                 {"g_over_kappa": g_over_kappa, "duration": duration,
                  "dt": dt, "store_every": store_every, "seed": seed})
    click.echo(f"wrote {path}")


@cli.command()
@shared_options
@click.option("--g-over-kappa", default=0.04, show_default=True, type=float)
@click.option("--n-traj", default=600, show_default=True, type=int)
@click.option("--duration", default=None, type=float,
              help="Record length (s); default adapts to the linewidths.")
@click.option("--dt", default=DEFAULT_DT, show_default=True, type=float)
@click.option("--store-every", default=1, show_default=True, type=int)
def transient(preset, config_path, out, seed, svg, g_over_kappa, n_traj,
              duration, dt, store_every):
    """Quench ensemble: transient correlation and entropy fluxes."""
    params = _params_from_config(preset, config_path)
    ensure_dir(out)
    res = transient_experiment(params, g_over_kappa, n_traj=n_traj,
                               master_seed=seed, duration=duration, dt=dt,
                               store_every=store_every)
    header = ["t", "R", "mu_b1", "mu_b2", "mu_a"]
    rows = np.column_stack([res.times, res.R, res.mu_b1_t, res.mu_b2_t,
                            res.mu_a_t]).tolist()
    path = os.path.join(out, "transient.csv")
    write_csv(path, header, rows)
    _maybe_svg(svg, path, header, rows)
    write_json(os.path.join(out, "transient_summary.json"),
               {"transient_time_s": res.transient_time,
                "g_over_kappa": g_over_kappa, "n_traj": n_traj})
    _echo_config(out, "transient", params,
                 {"g_over_kappa": g_over_kappa, "n_traj": n_traj,
                  "duration": duration, "dt": dt,
                  "store_every": store_every, "seed": seed})
    click.echo(f"wrote {path}")


def run(argv) -> int:
    """Dispatch argv and return the process exit code (0/2/3/4)."""
    try:
        cli.main(args=list(argv), prog_name="clocksync",
                 standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 2
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    except ClockSyncError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return 3
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return 4


def main():
    sys.exit(run(sys.argv[1:]))
