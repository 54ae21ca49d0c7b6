"""Command-line entry point: parse a run configuration, dispatch experiments,
write provenance-stamped tables and a run log."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    RunConfig,
    provenance_config,
    default_filtered_sqrt_d_axis,
    default_frmg_axis,
    default_landscape_f0_axis,
    default_scurve_axis,
    default_sqrt_d_axis,
    load_config,
    resolve_config,
    roundtrip_check,
    sweep_axis,
)
from .experiments import (
    CellJournal,
    SweepSpec,
    TABLE_COLUMNS,
    config_hash,
    default_holes,
    enhancement_rows,
    run_filtered_compare,
    run_frmg,
    run_landscape,
    run_noise_sweep,
    run_scurve,
    write_table,
)
from .fields import NoiseSpec, realization_seed, sample_white_noise, write_noise_trace
from .morse import MOLECULES, analytic_energy, morse_potential, solve_bound_states
from .observables import dissociation_probability
from .propagator import BlowupError, make_step_context, propagate_realization, pulse_window_steps

AU_TIME_FS = 0.02418884326586
AU_ENERGY_EV = 27.211386245988
AU_ENERGY_CM = 219474.6313632
AU_FIELD_V_PER_CM = 5.14220675112e9


def _config_from_args(args) -> RunConfig:
    overrides: dict = {}
    if getattr(args, "master_seed", None) is not None:
        overrides["master_seed"] = args.master_seed
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if getattr(args, "n_realizations", None) is not None:
        overrides["ensemble"] = {"n_realizations": args.n_realizations}
    if getattr(args, "output_dir", None) is not None:
        overrides["output_dir"] = args.output_dir
    if getattr(args, "molecule", None) is not None:
        overrides["molecule"] = args.molecule
    if args.config:
        return load_config(args.config, overrides)
    return resolve_config({}, overrides)


def _sweep_spec(cfg: RunConfig, kind: str, **extra) -> SweepSpec:
    return SweepSpec(
        kind=kind,
        molecule=cfg.molecule,
        grid=cfg.grid,
        pulse=cfg.pulse,
        propagation=cfg.propagation,
        n_realizations=cfg.n_realizations,
        master_seed=cfg.master_seed,
        workers=cfg.workers,
        chunk_size=cfg.chunk_size,
        **extra,
    )


def _make_logger(out_dir: str) -> logging.Logger:
    logger = logging.getLogger(f"morsekick.run.{out_dir}")
    logger.setLevel(logging.INFO)
    logger.handlers.clear()
    handler = logging.FileHandler(os.path.join(out_dir, "run.log"))
    handler.setFormatter(logging.Formatter("%(asctime)s %(message)s"))
    logger.addHandler(handler)
    return logger


def _cell_logger(logger: logging.Logger):
    last = time.monotonic()

    def log(message: str) -> None:
        nonlocal last
        now = time.monotonic()
        logger.info("%s wall=%.1fs", message, now - last)
        last = now

    return log


def _run_sweep(args, kind: str) -> int:
    cfg = _config_from_args(args)
    out_dir = cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    logger = _make_logger(out_dir)
    log = _cell_logger(logger)
    resolved = provenance_config(cfg.resolved)
    resolved["sweep"] = dict(resolved.get("sweep") or {})
    resolved["sweep"]["kind"] = kind

    journal = None
    if not args.no_resume:
        journal = CellJournal(
            os.path.join(out_dir, f"{kind}.journal.jsonl"), config_hash(resolved)
        )

    logger.info("start %s (morsekick %s)", kind, __version__)
    if kind == "scurve":
        axis = sweep_axis(cfg, "f0_values", default_scurve_axis)
        spec = _sweep_spec(cfg, kind, f0_values=tuple(axis))
        rows = run_scurve(axis, spec, journal=journal, log=log)
    elif kind == "noise_sweep":
        axis = sweep_axis(cfg, "sqrt_d_values", default_sqrt_d_axis)
        spec = _sweep_spec(cfg, kind, sqrt_d_values=tuple(axis))
        points = run_noise_sweep(axis, spec, journal=journal, log=log)
        rows = enhancement_rows(points, with_se=True)
    elif kind == "landscape":
        d_axis = sweep_axis(cfg, "sqrt_d_values", default_sqrt_d_axis)
        f_axis = sweep_axis(cfg, "f0_values", default_landscape_f0_axis)
        spec = _sweep_spec(cfg, kind, sqrt_d_values=tuple(d_axis), f0_values=tuple(f_axis))
        matrix, best = run_landscape(d_axis, f_axis, spec, journal=journal, log=log)
        rows = enhancement_rows([pt for row in matrix for pt in row], with_se=False)
        logger.info(
            "landscape global max eta=%.4g at sqrtD=%g F0=%g", best.eta, best.sqrtD, best.F0
        )
    elif kind == "frmg":
        axis = sweep_axis(cfg, "omega_p_values", default_frmg_axis)
        f_p = float(cfg.sweep.get("probe_amplitude", 0.05 * cfg.pulse.F0))
        delta_p = float(cfg.sweep.get("probe_delta", 0.0))
        spec = _sweep_spec(
            cfg, kind, omega_p_values=tuple(axis), probe_amplitude=f_p, probe_delta=delta_p
        )
        pumped, bare = run_frmg(axis, f_p, spec, journal=journal, log=log)
        rows = list(zip(axis, pumped.gain, bare.gain))
    elif kind == "filtered_compare":
        axis = sweep_axis(cfg, "sqrt_d_values", default_filtered_sqrt_d_axis)
        holes = cfg.sweep.get("holes")
        holes = (
            default_holes(cfg.molecule)
            if holes is None
            else tuple((float(c), float(w)) for c, w in holes)
        )
        bandwidth = float(cfg.sweep.get("bandwidth", 1.0))
        spec = _sweep_spec(
            cfg, kind, sqrt_d_values=tuple(axis), holes=holes, bandwidth=bandwidth
        )
        broadband, perforated = run_filtered_compare(
            spec, holes, sqrt_d_values=axis, journal=journal, log=log
        )
        rows = [
            [label] + row
            for label, points in ((0, broadband), (1, perforated))
            for row in enhancement_rows(points, with_se=True)
        ]
    else:  # pragma: no cover
        raise ValueError(kind)

    out_path = os.path.join(out_dir, f"{kind}.csv")
    write_table(out_path, TABLE_COLUMNS[kind], rows, resolved, cfg.master_seed)
    logger.info("wrote %s (%d rows)", out_path, len(rows))
    print(out_path)
    return 0


def _cmd_eigen(args) -> int:
    cfg = _config_from_args(args)
    basis = solve_bound_states(cfg.molecule, cfg.grid)
    lines = ["#  n   E_numeric(hartree)      E_analytic(hartree)     abs_diff"]
    for n, e_num in enumerate(basis.energies):
        e_ana = analytic_energy(cfg.molecule, n)
        lines.append(f"{n:4d}  {e_num: .12e}  {e_ana: .12e}  {abs(e_num - e_ana):.3e}")
    text = "\n".join(lines)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_propagate(args) -> int:
    cfg = _config_from_args(args)
    ctx = make_step_context(
        cfg.grid, morse_potential(cfg.molecule, cfg.grid.x), cfg.molecule.m, cfg.propagation
    )
    basis = solve_bound_states(cfg.molecule, cfg.grid)
    psi0 = basis.states[0]
    noise = None
    if cfg.noise.D > 0:
        seed = realization_seed(cfg.master_seed, cfg.noise.D, args.realization)
        n_kick = pulse_window_steps([cfg.pulse], cfg.propagation.dt)
        noise = sample_white_noise(
            NoiseSpec(cfg.noise.D, seed, cfg.noise.holes, cfg.noise.bandwidth),
            n_kick,
            cfg.propagation.dt,
        )
        if args.noise_trace:
            write_noise_trace(args.noise_trace, noise)
    final, record = propagate_realization(
        psi0,
        cfg.pulse,
        noise,
        ctx,
        cfg.propagation,
        record_stride=args.stride if args.trajectory else 0,
        bound_states=basis.state_matrix if args.trajectory else None,
    )
    if args.trajectory:
        with open(args.trajectory, "w") as fh:
            fh.write(f"# morsekick {__version__}\n")
            fh.write(f"# config: {json.dumps(cfg.resolved, sort_keys=True)}\n")
            fh.write("# t(au),norm,bound_total,x_mean(bohr)\n")
            for k in range(len(record.times)):
                fh.write(
                    f"{record.times[k]:.17g},{record.norm[k]:.17g},"
                    f"{record.bound_total[k]:.17g},{record.x_mean[k]:.17g}\n"
                )
    p_d = dissociation_probability(final, basis)
    print(f"P_d = {p_d:.12e}")
    print(f"final_norm = {np.sum(np.abs(final.amplitudes) ** 2) * cfg.grid.dx:.12f}")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config_path)
    if not roundtrip_check(cfg):
        print("config does not round-trip losslessly", file=sys.stderr)
        return 2
    print("OK")
    print(json.dumps(cfg.resolved, indent=2, sort_keys=True))
    return 0


def _cmd_units(args) -> int:
    print("atomic-unit conversions:")
    print(f"  1 a.u. time   = {AU_TIME_FS} fs")
    print(f"  1 hartree     = {AU_ENERGY_EV} eV = {AU_ENERGY_CM} cm^-1")
    print(f"  1 a.u. field  = {AU_FIELD_V_PER_CM:.6e} V/cm")
    if args.time_au is not None:
        print(f"  {args.time_au} a.u. time = {args.time_au * AU_TIME_FS:.6g} fs")
    if args.energy_au is not None:
        print(
            f"  {args.energy_au} hartree = {args.energy_au * AU_ENERGY_EV:.6g} eV"
            f" = {args.energy_au * AU_ENERGY_CM:.6g} cm^-1"
        )
    if args.field_au is not None:
        print(f"  {args.field_au} a.u. field = {args.field_au * AU_FIELD_V_PER_CM:.6e} V/cm")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morsekick",
        description="Morse-oscillator wavepacket simulator with stochastic driving",
    )
    parser.add_argument("--version", action="version", version=f"morsekick {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, ensemble=True):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--molecule", choices=sorted(MOLECULES), help="molecule preset override")
        p.add_argument("--master-seed", type=int, dest="master_seed")
        p.add_argument("--workers", type=int)
        p.add_argument("--output-dir", dest="output_dir")
        if ensemble:
            p.add_argument("--n-realizations", type=int, dest="n_realizations")
        p.add_argument(
            "--no-resume", action="store_true",
            help="ignore any existing journal and recompute every cell",
        )

    for kind, cmd in (
        ("scurve", "scurve"),
        ("noise_sweep", "noise-sweep"),
        ("landscape", "landscape"),
        ("frmg", "frmg"),
        ("filtered_compare", "filtered-compare"),
    ):
        p = sub.add_parser(cmd, help=f"run the {cmd} experiment")
        add_common(p)
        p.set_defaults(func=lambda a, kind=kind: _run_sweep(a, kind))

    p = sub.add_parser("eigen", help="bound-state energies vs the analytic formula")
    p.add_argument("--config")
    p.add_argument("--molecule", choices=sorted(MOLECULES))
    p.add_argument("--output")
    p.set_defaults(func=_cmd_eigen)

    p = sub.add_parser("propagate", help="propagate a single realization")
    p.add_argument("--config")
    p.add_argument("--molecule", choices=sorted(MOLECULES))
    p.add_argument("--master-seed", type=int, dest="master_seed")
    p.add_argument("--realization", type=int, default=0)
    p.add_argument("--trajectory", help="write a (t, norm, bound, <x>) time series here")
    p.add_argument("--stride", type=int, default=1000)
    p.add_argument("--noise-trace", dest="noise_trace", help="export the sampled noise trace")
    p.set_defaults(func=_cmd_propagate)

    p = sub.add_parser("validate-config", help="check a configuration file")
    p.add_argument("config_path")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("units", help="print atomic-unit conversions")
    p.add_argument("--time-au", type=float, dest="time_au")
    p.add_argument("--energy-au", type=float, dest="energy_au")
    p.add_argument("--field-au", type=float, dest="field_au")
    p.set_defaults(func=_cmd_units)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except BlowupError as err:
        print(f"numerical blowup: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
