"""Dissociation probabilities, ensemble averaging, enhancement factor, and
absorbed energy."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np
import scipy.fft as sfft

from .fields import (
    LaserPulse,
    NoiseRealization,
    NoiseSpec,
    realization_seed,
    sample_filtered_noise,
    sample_white_noise,
)
from .grid import GridMismatchError, Wavefunction
from .morse import BoundStateBasis, morse_potential
from .propagator import (
    BlowupError,
    PropagationConfig,
    StepContext,
    _propagate_batch,
    midpoint_field,
    pulse_window_steps,
)

# Floor for the enhancement denominator; points at the floor are flagged.
ETA_FLOOR = 1e-14


@dataclass(frozen=True)
class DissociationRecord:
    """Outcome of one noise realization."""

    realization_index: int
    P_d: float
    seed: int


@dataclass(frozen=True)
class EnsembleResult:
    """Per-realization dissociation probabilities plus their mean and spread."""

    records: tuple[DissociationRecord, ...]
    mean: float
    std_error: float

    @property
    def n_realizations(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class EnhancementPoint:
    """One point of the noise-enhancement curve or landscape."""

    sqrtD: float
    F0: float
    P_L: float
    P_N: float
    P_LN: float
    eta: float
    floored: bool
    se_N: float = 0.0
    se_LN: float = 0.0


def bound_projections(psi: Wavefunction, basis: BoundStateBasis) -> np.ndarray:
    """Complex coefficients <psi_nu|psi> for every bound state."""
    if psi.grid != basis.grid:
        raise GridMismatchError("wavefunction and basis grids differ")
    return basis.state_matrix.conj() @ psi.amplitudes * psi.grid.dx


def dissociation_probability(psi: Wavefunction, basis: BoundStateBasis) -> float:
    """1 minus the total bound-state population, clamped to [0, 1].

    Amplitude removed by the absorber no longer projects onto any bound state,
    so it counts as dissociated automatically.
    """
    c = bound_projections(psi, basis)
    return float(min(max(1.0 - np.sum(np.abs(c) ** 2), 0.0), 1.0))


def enhancement(P_L: float, P_N: float, P_LN: float, floor: float = ETA_FLOOR) -> float:
    """(P_LN - P_L - P_N) / (P_L + P_N), denominator floored to stay finite."""
    p0 = P_L + P_N
    return (P_LN - p0) / max(p0, floor)


def make_enhancement_point(
    sqrtD: float,
    F0: float,
    P_L: float,
    n_result: EnsembleResult,
    ln_result: EnsembleResult,
) -> EnhancementPoint:
    p0 = P_L + n_result.mean
    return EnhancementPoint(
        sqrtD=sqrtD,
        F0=F0,
        P_L=P_L,
        P_N=n_result.mean,
        P_LN=ln_result.mean,
        eta=enhancement(P_L, n_result.mean, ln_result.mean),
        floored=p0 < ETA_FLOOR,
        se_N=n_result.std_error,
        se_LN=ln_result.std_error,
    )


def absorbed_energy(psi_final: Wavefunction, basis: BoundStateBasis, E0: float) -> float:
    """Net energy absorbed relative to the initial energy E0.

    Bound populations are booked at their eigenenergies, the on-grid continuum
    remainder at <H0>, and norm lost to the absorber at the threshold energy 0
    (undercounts fast-fragment kinetic energy, leaves peak positions intact).
    """
    c = bound_projections(psi_final, basis)
    grid = psi_final.grid
    bound_part = float(np.sum(np.asarray(basis.energies) * np.abs(c) ** 2))
    psi_c = psi_final.amplitudes - c @ basis.state_matrix
    v = morse_potential(basis.params, grid.x)
    kinetic = grid.momenta**2 / (2.0 * basis.params.m)
    psi_c_p = sfft.fft(psi_c, norm="ortho")
    continuum_part = float(
        np.real(np.vdot(psi_c_p, kinetic * psi_c_p)) * grid.dx
        + np.real(np.vdot(psi_c, v * psi_c)) * grid.dx
    )
    return bound_part + continuum_part - E0


# ---------------------------------------------------------------------------
# Ensemble runner. Realizations are grouped into fixed-size chunks that are
# independent work units; chunk composition depends only on n_realizations and
# chunk_size, never on the worker count, so results are reproducible for any
# level of parallelism. Workers inherit the read-only payload via fork.
# ---------------------------------------------------------------------------


@dataclass
class _EnsemblePayload:
    psi0: np.ndarray
    state_matrix: np.ndarray
    ctx: StepContext
    cfg: PropagationConfig
    pulse: LaserPulse
    pulse_on: bool
    noise: NoiseSpec | None
    spectral_noise: bool
    master_seed: int


_PAYLOAD: _EnsemblePayload | None = None


def _sample_kicks(payload: _EnsemblePayload, seed: int, n_kick: int) -> NoiseRealization:
    spec = NoiseSpec(
        D=payload.noise.D,
        seed=seed,
        holes=payload.noise.holes,
        bandwidth=payload.noise.bandwidth,
    )
    sampler = sample_filtered_noise if payload.spectral_noise else sample_white_noise
    return sampler(spec, n_kick, payload.cfg.dt)


def _run_chunk(job: tuple[int, int]) -> list[tuple[int, float, int]]:
    payload = _PAYLOAD
    start, count = job
    cfg = payload.cfg
    n_kick = pulse_window_steps([payload.pulse], cfg.dt)
    seeds = [
        realization_seed(payload.master_seed, payload.noise.D, start + k)
        for k in range(count)
    ]
    kicks = np.empty((count, n_kick))
    for k, seed in enumerate(seeds):
        kicks[k] = _sample_kicks(payload, seed, n_kick).scaled_kicks()
    batch = np.tile(payload.psi0, (count, 1))
    field = None
    if payload.pulse_on:
        field = midpoint_field([payload.pulse], min(n_kick, cfg.n_steps), cfg.dt)
    try:
        batch = _propagate_batch(batch, payload.ctx, cfg.n_steps, common_field=field, kicks=kicks)
    except BlowupError as err:
        raise BlowupError(
            err.step,
            f" (realizations {start}..{start + count - 1}, seeds {seeds})",
        ) from None
    coeff = payload.state_matrix.conj() @ batch.T * payload.ctx.grid.dx
    p_d = 1.0 - np.sum(np.abs(coeff) ** 2, axis=0)
    return [
        (start + k, float(min(max(p_d[k], 0.0), 1.0)), seeds[k]) for k in range(count)
    ]


def run_ensemble(
    psi0: Wavefunction,
    basis: BoundStateBasis,
    pulse: LaserPulse,
    pulse_on: bool,
    noise: NoiseSpec | None,
    ctx: StepContext,
    cfg: PropagationConfig,
    n_realizations: int,
    master_seed: int,
    workers: int = 1,
    chunk_size: int = 8,
    spectral_noise: bool = False,
) -> EnsembleResult:
    """Average the dissociation probability over independent noise realizations.

    The pulse object always defines the noise window [0, Tp]; ``pulse_on``
    controls whether its field actually drives the system. With no noise the
    dynamics is deterministic and a single propagation serves every record.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    global _PAYLOAD
    if noise is None or noise.D == 0.0:
        field = midpoint_field(
            [pulse] if pulse_on else [],
            min(pulse_window_steps([pulse], cfg.dt), cfg.n_steps),
            cfg.dt,
        )
        batch = _propagate_batch(
            psi0.amplitudes[None, :].copy(), ctx, cfg.n_steps,
            common_field=field, exact_phases=True,
        )
        coeff = basis.state_matrix.conj() @ batch[0] * ctx.grid.dx
        p_d = float(min(max(1.0 - np.sum(np.abs(coeff) ** 2), 0.0), 1.0))
        records = tuple(
            DissociationRecord(r, p_d, realization_seed(master_seed, 0.0, r))
            for r in range(n_realizations)
        )
        return EnsembleResult(records, p_d, 0.0)

    _PAYLOAD = _EnsemblePayload(
        psi0=psi0.amplitudes,
        state_matrix=basis.state_matrix,
        ctx=ctx,
        cfg=cfg,
        pulse=pulse,
        pulse_on=pulse_on,
        noise=noise,
        spectral_noise=spectral_noise,
        master_seed=master_seed,
    )
    jobs = [
        (start, min(chunk_size, n_realizations - start))
        for start in range(0, n_realizations, chunk_size)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, mp_context=get_context("fork")
        ) as pool:
            chunk_results = list(pool.map(_run_chunk, jobs))
    else:
        chunk_results = [_run_chunk(job) for job in jobs]
    _PAYLOAD = None

    records = tuple(
        DissociationRecord(idx, p_d, seed)
        for chunk in chunk_results
        for idx, p_d, seed in chunk
    )
    values = np.asarray([rec.P_d for rec in records])
    mean = float(np.mean(values))
    std_error = 0.0
    if len(values) > 1:
        std_error = float(np.std(values, ddof=1) / math.sqrt(len(values)))
    return EnsembleResult(records, mean, std_error)
