#!/usr/bin/env python3
"""Render publication-style figures from morsekick sweep tables.

Standalone by design: this script only understands the public delimited-text
format (comma-separated rows under '#' provenance headers) and never imports
the simulator, so the primary suite runs without it.

Usage:
    python render_figures.py --kind scurve --input scurve.csv --output fig1.png
    python render_figures.py --kind landscape_surface --input landscape.csv \
        --output fig4.png
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "render_figures"  # deterministic SVG ids

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("scurve", "noise_curves", "eta_curve", "landscape_surface", "gain_profile")


class TableError(ValueError):
    """Malformed or incomplete input table."""


@dataclass
class FigureJob:
    inputs: list[str]
    kind: str
    output: str
    log_x: bool = False
    log_y: bool = True
    title: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise TableError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise TableError("at least one input table is required")


@dataclass
class Table:
    columns: list[str]
    data: np.ndarray
    meta: dict = field(default_factory=dict)

    def col(self, name: str) -> np.ndarray:
        for i, column in enumerate(self.columns):
            if column == name or column.split("(")[0] == name:
                return self.data[:, i]
        raise TableError(f"missing column {name!r}; table has {self.columns}")


def read_table(path: str) -> Table:
    meta: dict = {}
    columns: list[str] = []
    rows: list[list[float]] = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                body = line[2:]
                key, sep, value = body.partition(": ")
                if sep and " " not in key:
                    meta[key] = value
                elif not body.startswith("morsekick "):
                    columns = body.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    if not columns:
        raise TableError(f"{path}: no column header found")
    if not rows:
        raise TableError(f"{path}: table has no data rows")
    return Table(columns, np.asarray(rows), meta)


def _positive_floor(values: np.ndarray) -> np.ndarray:
    # log-scale panels: clip exact zeros to the smallest positive value
    positive = values[values > 0]
    floor = positive.min() * 1e-2 if positive.size else 1e-300
    return np.maximum(values, floor)


def build_figure(job: FigureJob):
    tables = [read_table(p) for p in job.inputs]
    builder = {
        "scurve": _build_scurve,
        "noise_curves": _build_noise_curves,
        "eta_curve": _build_eta_curve,
        "landscape_surface": _build_landscape,
        "gain_profile": _build_gain_profile,
    }[job.kind]
    fig = builder(job, tables[0])
    if job.title:
        fig.suptitle(job.title)
    return fig


def _build_scurve(job: FigureJob, table: Table):
    f0 = table.col("F0")
    p = table.col("P_L")
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    ax.plot(f0, _positive_floor(p), "o-", color="tab:blue")
    if job.log_y:
        ax.set_yscale("log")
    above = np.nonzero(p > 0.5)[0]
    if above.size:
        ax.axvline(f0[above[0]], color="tab:red", ls="--", lw=1)
        ax.annotate(
            f"threshold ~ {f0[above[0]]:.3g} a.u.",
            xy=(f0[above[0]], 0.5), xytext=(5, -12), textcoords="offset points",
            fontsize=8, color="tab:red",
        )
    ax.set_xlabel(r"peak amplitude $F_0$ (a.u.)")
    ax.set_ylabel(r"dissociation probability $P_L$")
    fig.tight_layout()
    return fig


def _build_noise_curves(job: FigureJob, table: Table):
    sqrt_d = table.col("sqrtD")
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    ax.plot(sqrt_d, _positive_floor(table.col("P_N")), "s-", label=r"$P_N$ (noise only)")
    ax.plot(sqrt_d, _positive_floor(table.col("P_LN")), "o-", label=r"$P_{L+N}$")
    ax.set_xscale("log")
    if job.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(r"noise amplitude $\sqrt{D}$ (a.u.)")
    ax.set_ylabel("dissociation probability")
    ax.legend()
    fig.tight_layout()
    return fig


def _eta_groups(table: Table):
    # filtered-compare tables carry a spectrum column (0=broadband, 1=perforated)
    try:
        spectra = table.col("spectrum")
    except TableError:
        return [("", table.col("sqrtD"), table.col("eta"))]
    groups = []
    for value, label in ((0, "broadband"), (1, "perforated")):
        sel = spectra == value
        if np.any(sel):
            groups.append((label, table.col("sqrtD")[sel], table.col("eta")[sel]))
    return groups


def _build_eta_curve(job: FigureJob, table: Table):
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    for label, sqrt_d, eta in _eta_groups(table):
        ax.plot(sqrt_d, _positive_floor(eta), "o-", label=label or None)
    ax.set_xscale("log")
    if job.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(r"noise amplitude $\sqrt{D}$ (a.u.)")
    ax.set_ylabel(r"enhancement $\eta$")
    if len(ax.lines) > 1:
        ax.legend()
    fig.tight_layout()
    return fig


def _build_landscape(job: FigureJob, table: Table):
    sqrt_d = table.col("sqrtD")
    f0 = table.col("F0")
    eta = table.col("eta")
    d_axis = np.unique(sqrt_d)
    f_axis = np.unique(f0)
    surface = np.full((len(d_axis), len(f_axis)), np.nan)
    for sd, f, e in zip(sqrt_d, f0, eta):
        surface[np.searchsorted(d_axis, sd), np.searchsorted(f_axis, f)] = e
    if np.any(np.isnan(surface)):
        raise TableError("landscape table does not cover a full (sqrtD, F0) grid")
    z = np.log10(np.maximum(surface, 1e-3))
    dd, ff = np.meshgrid(d_axis, f_axis, indexing="ij")
    fig = plt.figure(figsize=(6.0, 4.6))
    ax = fig.add_subplot(projection="3d")
    ax.plot_surface(dd, ff, z, cmap="viridis", alpha=0.9)
    # contour lines of equal enhancement projected on the (sqrtD, F0) plane
    ax.contour(dd, ff, z, levels=8, zdir="z", offset=z.min() - 0.5, cmap="viridis")
    ax.set_zlim(z.min() - 0.5, z.max() + 0.2)
    ax.set_xlabel(r"$\sqrt{D}$ (a.u.)")
    ax.set_ylabel(r"$F_0$ (a.u.)")
    ax.set_zlabel(r"$\log_{10}\eta$")
    return fig


def _build_gain_profile(job: FigureJob, table: Table):
    omega = table.col("omega_p")
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.plot(omega, _positive_floor(table.col("G_pumped")), color="tab:red", label="pumped")
    ax.plot(omega, _positive_floor(table.col("G_bare")), color="black", lw=1, label="bare molecule")
    if job.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(r"probe frequency $\omega_p$ (a.u.)")
    ax.set_ylabel(r"gain $G$ (hartree)")
    ax.legend()
    fig.tight_layout()
    return fig


def render(job: FigureJob) -> str:
    """Build the figure and write it; returns the output path."""
    fig = build_figure(job)
    suffix = job.output.rsplit(".", 1)[-1].lower()
    # keep renders byte-deterministic: no dates or version stamps in the file
    metadata = {
        "png": {"Software": "render_figures"},
        "svg": {"Date": None},
        "pdf": {"CreationDate": None},
    }.get(suffix, None)
    fig.savefig(job.output, dpi=150, metadata=metadata)
    plt.close(fig)
    return job.output


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--input", action="append", required=True, help="input table (repeatable)")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--output", required=True)
    parser.add_argument("--linear-y", action="store_true", help="linear instead of log y axis")
    parser.add_argument("--log-x", action="store_true")
    parser.add_argument("--title", default="")
    args = parser.parse_args(argv)
    try:
        job = FigureJob(
            inputs=args.input,
            kind=args.kind,
            output=args.output,
            log_x=args.log_x,
            log_y=not args.linear_y,
            title=args.title,
        )
        render(job)
    except (TableError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
