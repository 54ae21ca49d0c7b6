"""Run configuration: JSON document in, fully resolved and validated objects out.

Everything is in atomic units. A configuration resolves to explicit numbers
(pulse duration, t_end, sweep axes, ...) before anything runs, and the
resolved dictionary is what lands in output-table headers, so outputs are
reproducible from their own provenance.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .fields import LaserPulse, NoiseSpec
from .grid import GridSpec, make_grid
from .morse import MOLECULES, MorseParams
from .propagator import PropagationConfig


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def default_scurve_axis() -> list[float]:
    # Dense through the threshold region, includes the subthreshold anchor
    # 0.04 and the convergence-test point 0.08.
    return [0.02, 0.04, 0.06, 0.08, 0.09, 0.10, 0.11, 0.12, 0.16, 0.20, 0.25, 0.30]


def default_sqrt_d_axis(n: int = 20) -> list[float]:
    return [float(v) for v in np.geomspace(0.002, 0.06, n)]


def default_landscape_f0_axis() -> list[float]:
    return [float(v) for v in np.linspace(0.01, 0.12, 12)]


def default_frmg_axis() -> list[float]:
    return [float(v) for v in np.linspace(0.002, 0.030, 280)]


def default_filtered_sqrt_d_axis() -> list[float]:
    # The band-limited sampler is normalized to unit per-sample variance, so
    # at BW = 1.0 a.u. its low-frequency spectral density exceeds white noise
    # of the same D by pi/(BW*dt); the enhancement peak sits at accordingly
    # smaller sqrtD.
    return [float(v) for v in np.geomspace(0.0012, 0.012, 8)]


DEFAULTS: dict = {
    "molecule": "hf",
    "grid": {"x_min": -2.0, "x_max": 38.0, "n_points": 2048},
    "pulse": {"F0": 0.04, "omega": 0.007, "delta": 0.0, "Tp": None},
    "noise": {"D": 0.0, "holes": [], "bandwidth": 1.0},
    "propagation": {
        "dt": 0.1,
        "t_end": None,  # null -> 1.5 * Tp
        "absorber_start": 0.75,
        "mask_exponent": 0.125,
        "absorber": True,
    },
    "ensemble": {"n_realizations": 100, "chunk_size": 8},
    "sweep": {"kind": None},
    "master_seed": 20260810,
    "workers": None,  # null -> available parallelism
    "output_dir": "runs",
}


@dataclass
class RunConfig:
    """Fully resolved configuration plus the provenance dictionary."""

    molecule: MorseParams
    grid: GridSpec
    pulse: LaserPulse
    noise: NoiseSpec
    propagation: PropagationConfig
    n_realizations: int
    chunk_size: int
    master_seed: int
    workers: int
    output_dir: str
    sweep: dict
    resolved: dict


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value, f"{path}{key}.")
        else:
            out[key] = value
    return out


def _expect_number(raw: dict, section: str, key: str) -> float:
    value = raw.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{section}.{key}: expected a number, got {value!r}")
    return float(value)


def resolve_config(document: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge defaults, file values, and flag overrides; validate everything."""
    raw = _merge(DEFAULTS, document or {})
    if overrides:
        raw = _merge(raw, overrides)

    mol = raw["molecule"]
    if isinstance(mol, str):
        if mol not in MOLECULES:
            raise ConfigError(
                f"molecule: unknown preset {mol!r}; available: {sorted(MOLECULES)}"
            )
        params = MOLECULES[mol]
        mol_resolved = {"m": params.m, "De": params.De, "beta": params.beta, "preset": mol}
    else:
        try:
            params = MorseParams(
                m=_expect_number(mol, "molecule", "m"),
                De=_expect_number(mol, "molecule", "De"),
                beta=_expect_number(mol, "molecule", "beta"),
            )
        except ConfigError:
            raise
        except ValueError as err:
            raise ConfigError(f"molecule: {err}") from None
        mol_resolved = {"m": params.m, "De": params.De, "beta": params.beta}
        if "preset" in mol:  # annotation from a previous resolution round-trips
            mol_resolved["preset"] = mol["preset"]

    g = raw["grid"]
    try:
        grid = make_grid(
            _expect_number(g, "grid", "x_min"),
            _expect_number(g, "grid", "x_max"),
            int(_expect_number(g, "grid", "n_points")),
        )
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(f"grid: {err}") from None

    p = raw["pulse"]
    try:
        pulse = LaserPulse(
            F0=_expect_number(p, "pulse", "F0"),
            omega=_expect_number(p, "pulse", "omega"),
            delta=_expect_number(p, "pulse", "delta"),
            Tp=None if p.get("Tp") is None else _expect_number(p, "pulse", "Tp"),
        )
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(f"pulse: {err}") from None
    if pulse.F0 < 0:
        raise ConfigError(f"pulse.F0: must be >= 0, got {pulse.F0}")

    n = raw["noise"]
    try:
        noise = NoiseSpec(
            D=_expect_number(n, "noise", "D"),
            seed=int(raw["master_seed"]),
            holes=tuple(tuple(h) for h in n.get("holes", [])),
            bandwidth=_expect_number(n, "noise", "bandwidth"),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(f"noise: {err}") from None

    pr = raw["propagation"]
    t_end = pr.get("t_end")
    if t_end is None:
        t_end = 1.5 * pulse.Tp
    try:
        propagation = PropagationConfig(
            dt=_expect_number(pr, "propagation", "dt"),
            t_end=float(t_end),
            absorber_start=_expect_number(pr, "propagation", "absorber_start"),
            mask_exponent=_expect_number(pr, "propagation", "mask_exponent"),
            absorber=bool(pr.get("absorber", True)),
        )
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(f"propagation: {err}") from None
    if propagation.t_end < pulse.Tp:
        raise ConfigError(
            f"propagation.t_end: {propagation.t_end} is shorter than the pulse Tp={pulse.Tp}"
        )

    e = raw["ensemble"]
    n_real = int(_expect_number(e, "ensemble", "n_realizations"))
    chunk = int(_expect_number(e, "ensemble", "chunk_size"))
    if n_real < 1:
        raise ConfigError(f"ensemble.n_realizations: must be >= 1, got {n_real}")
    if chunk < 1:
        raise ConfigError(f"ensemble.chunk_size: must be >= 1, got {chunk}")

    workers = raw["workers"]
    if workers is None:
        workers = int(os.environ.get("MORSEKICK_WORKERS", 0)) or (os.cpu_count() or 1)
    workers = int(workers)
    if workers < 1:
        raise ConfigError(f"workers: must be >= 1, got {workers}")

    sweep = dict(raw.get("sweep") or {})

    resolved = {
        "molecule": mol_resolved,
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max, "n_points": grid.n_points},
        "pulse": {"F0": pulse.F0, "omega": pulse.omega, "delta": pulse.delta, "Tp": pulse.Tp},
        "noise": {"D": noise.D, "holes": [list(h) for h in noise.holes], "bandwidth": noise.bandwidth},
        "propagation": {
            "dt": propagation.dt,
            "t_end": propagation.t_end,
            "absorber_start": propagation.absorber_start,
            "mask_exponent": propagation.mask_exponent,
            "absorber": propagation.absorber,
        },
        "ensemble": {"n_realizations": n_real, "chunk_size": chunk},
        "sweep": sweep,
        "master_seed": int(raw["master_seed"]),
        "workers": workers,
        "output_dir": str(raw["output_dir"]),
    }
    return RunConfig(
        molecule=params,
        grid=grid,
        pulse=pulse,
        noise=noise,
        propagation=propagation,
        n_realizations=n_real,
        chunk_size=chunk,
        master_seed=int(raw["master_seed"]),
        workers=workers,
        output_dir=str(raw["output_dir"]),
        sweep=sweep,
        resolved=resolved,
    )


def load_config(path: str | os.PathLike, overrides: dict | None = None) -> RunConfig:
    with open(path) as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file {path}: invalid JSON ({err})") from None
    if not isinstance(document, dict):
        raise ConfigError(f"config file {path}: top level must be an object")
    return resolve_config(document, overrides)


def roundtrip_check(cfg: RunConfig) -> bool:
    """Resolved config survives serialization losslessly."""
    again = resolve_config(json.loads(json.dumps(cfg.resolved)))
    return again.resolved == cfg.resolved


def provenance_config(resolved: dict) -> dict:
    """The physics-determining part of a resolved config.

    Worker count and output paths steer execution, not results, so they stay
    out of table headers and journal hashes; identical physics configs then
    produce byte-identical outputs on any machine.
    """
    return {k: v for k, v in resolved.items() if k not in ("workers", "output_dir")}


def sweep_axis(cfg: RunConfig, key: str, fallback) -> list[float]:
    values = cfg.sweep.get(key)
    if values is None:
        return fallback() if callable(fallback) else list(fallback)
    if not isinstance(values, list) or not values:
        raise ConfigError(f"sweep.{key}: expected a non-empty list")
    out = [float(v) for v in values]
    if not all(b > a for a, b in zip(out, out[1:])):
        raise ConfigError(f"sweep.{key}: values must be strictly increasing")
    return out
