"""Driving fields: the sin^2-envelope laser pulse, white noise, and
spectrally perforated (chaotic-light) noise.

Noise streams are Philox counter-based so that realization r of a given run is
reproducible independently of execution order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft


@dataclass(frozen=True)
class LaserPulse:
    """F(t) = sin^2(pi*t/Tp) * F0 * sin(omega*t + delta) on [0, Tp], zero outside."""

    F0: float
    omega: float
    delta: float = 0.0
    Tp: float | None = None

    def __post_init__(self) -> None:
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.Tp is None:
            # 15 optical cycles by default
            object.__setattr__(self, "Tp", 30.0 * np.pi / self.omega)
        if self.Tp <= 0:
            raise ValueError(f"Tp must be positive, got {self.Tp}")

    @property
    def n_cycles(self) -> float:
        return self.Tp * self.omega / (2.0 * np.pi)


def laser_field(pulse: LaserPulse, t: np.ndarray | float) -> np.ndarray | float:
    """Instantaneous field amplitude; continuous, |F| <= F0, zero outside the pulse."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < pulse.Tp)
    envelope = np.where(inside, np.sin(np.pi * t / pulse.Tp) ** 2, 0.0)
    out = envelope * pulse.F0 * np.sin(pulse.omega * t + pulse.delta)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NoiseSpec:
    """White-noise intensity D plus optional spectral holes for chaotic light.

    ``holes`` is a tuple of (center, width) bands to suppress; they are only
    meaningful for the spectrally synthesized sampler and must lie inside
    (0, bandwidth).
    """

    D: float
    seed: int = 0
    holes: tuple[tuple[float, float], ...] = field(default=())
    bandwidth: float = 1.0

    def __post_init__(self) -> None:
        if self.D < 0:
            raise ValueError(f"noise intensity D must be >= 0, got {self.D}")
        if self.bandwidth <= 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        object.__setattr__(self, "holes", tuple((float(c), float(w)) for c, w in self.holes))
        for center, width in self.holes:
            if width <= 0:
                raise ValueError(f"hole width must be positive, got {width}")
            if center - width / 2.0 < 0.0 or center + width / 2.0 > self.bandwidth:
                raise ValueError(
                    f"hole ({center}, {width}) extends outside (0, {self.bandwidth})"
                )

    def kick_scale(self, dt: float) -> float:
        """Per-step momentum-kick amplitude sqrt(2*D*dt)."""
        return float(np.sqrt(2.0 * self.D * dt))


@dataclass
class NoiseRealization:
    """One realization's unit-variance deviates, one entry per time step."""

    kicks: np.ndarray
    spec: NoiseSpec
    dt: float

    @property
    def n_steps(self) -> int:
        return len(self.kicks)

    def scaled_kicks(self) -> np.ndarray:
        """The actual per-step phase slopes sqrt(2*D*dt) * xi_t."""
        return self.spec.kick_scale(self.dt) * self.kicks


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def realization_seed(master_seed: int, noise_intensity: float, realization: int) -> int:
    """Derive the integer stream seed for one realization.

    Keying on (master seed, D, realization index) makes the noise identical for
    noise-only and laser+noise ensembles at the same D, and for duplicated
    sweep cells, regardless of execution order.
    """
    d_bits = int(np.float64(noise_intensity).view(np.uint64))
    ss = np.random.SeedSequence((int(master_seed), d_bits, int(realization)))
    return int(ss.generate_state(1, np.uint64)[0])


def sample_white_noise(spec: NoiseSpec, n_steps: int, dt: float) -> NoiseRealization:
    """I.i.d. standard-normal deviates from the seeded stream."""
    if n_steps <= 0:
        raise ValueError(f"n_steps must be positive, got {n_steps}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    kicks = _generator(spec.seed).standard_normal(n_steps)
    return NoiseRealization(kicks, spec, float(dt))


def _spectral_window(spec: NoiseSpec, n_steps: int, dt: float) -> tuple[np.ndarray, float]:
    """Active-bin indicator for the one-sided spectrum plus the no-hole scale."""
    omega = 2.0 * np.pi * np.fft.rfftfreq(n_steps, d=dt)
    in_band = omega <= spec.bandwidth
    # Parseval weights: interior bins carry two conjugate partners.
    weights = np.full(omega.shape, 2.0)
    weights[0] = 1.0
    if n_steps % 2 == 0:
        weights[-1] = 1.0
    # Normalization is fixed by the hole-free band so that carving holes only
    # removes power instead of silently boosting the rest of the spectrum.
    scale = n_steps / np.sqrt(np.sum(weights * in_band))
    active = in_band.copy()
    for center, width in spec.holes:
        active &= ~((omega >= center - width / 2.0) & (omega <= center + width / 2.0))
    return active, scale


def sample_filtered_noise(spec: NoiseSpec, n_steps: int, dt: float) -> NoiseRealization:
    """Band-limited Gaussian noise with the configured spectral holes suppressed.

    Synthesized from independent Gaussian spectral amplitudes; with no holes the
    trace has unit per-sample variance, matching the white-noise contract.
    """
    if n_steps <= 0:
        raise ValueError(f"n_steps must be positive, got {n_steps}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    rng = _generator(spec.seed)
    n_bins = n_steps // 2 + 1
    re = rng.standard_normal(n_bins)
    im = rng.standard_normal(n_bins)
    coeff = (re + 1j * im) / np.sqrt(2.0)
    coeff[0] = re[0]  # DC and Nyquist bins of a real signal are real
    if n_steps % 2 == 0:
        coeff[-1] = re[-1]
    active, scale = _spectral_window(spec, n_steps, dt)
    kicks = sfft.irfft(coeff * active * scale, n=n_steps)
    return NoiseRealization(kicks, spec, float(dt))


def write_noise_trace(path, realization: NoiseRealization) -> None:
    """Export a sampled trace as two-column text (t, xi) for inspection."""
    t = realization.dt * np.arange(realization.n_steps)
    with open(path, "w") as fh:
        fh.write("# t(au) xi\n")
        for ti, xi in zip(t, realization.kicks):
            fh.write(f"{ti:.17g} {xi:.17g}\n")
